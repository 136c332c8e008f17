# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import math

import numpy as np
import pytest
from conftest import Watcher

from spinstab import (
    DEBUG,
    INFO,
    RESERVED_TAIL,
    ArgumentError,
    CapacityError,
    CouplingRealization,
    ModelSpec,
    Quench,
    QuenchedEstimate,
    RejectedRun,
    UnsupportedModelError,
    annealed_pressure,
    logger,
    quenched_average,
    quenched_pressure,
    set_verbose,
)


@pytest.fixture
def watcher():
    return Watcher(logger=logger)


def test_estimate_from_samples():
    est = QuenchedEstimate.from_samples([1.0, 2.0, 3.0, 4.0])
    assert est.mean == 2.5
    assert est.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert est.n_samples == 4

    single = QuenchedEstimate.from_samples([0.3])
    assert single.mean == 0.3 and single.stderr == 0.0

    kept = QuenchedEstimate.from_samples([5.0, 5.0], keep=True, extra={"note": "x"})
    assert kept.to_dict() == {"mean": 5.0, "stderr": 0.0, "n_samples": 2, "per_sample": [5.0, 5.0], "note": "x"}
    with pytest.raises(ArgumentError):
        QuenchedEstimate.from_samples([])


def test_infinite_temperature_pressure():
    n = 6
    est = quenched_pressure(ModelSpec.sk(n), 0.0, n_samples=5, master_seed=1)
    assert est.mean == pytest.approx(n * math.log(2.0), rel=1e-14)
    assert est.stderr == 0.0
    assert est.extra["annealed"] == pytest.approx(n * math.log(2.0))


def test_annealed_bound():
    model = ModelSpec.sk(6)
    est = quenched_pressure(model, 1.5, n_samples=20, master_seed=2)
    assert est.extra["annealed_bound_ok"]
    assert est.mean < annealed_pressure(model, 1.5)
    assert annealed_pressure(model, 1.0) == pytest.approx(6 * math.log(2.0) + 0.5 * 6)
    assert annealed_pressure(ModelSpec.ea(2, 3), 2.0) == pytest.approx(9 * math.log(2.0) + 0.5 * 4.0 * 9 * 18 / 18)
    with pytest.raises(UnsupportedModelError):
        annealed_pressure(ModelSpec.cw(6), 1.0)


def test_curie_weiss_pressure_is_deterministic():
    est = quenched_pressure(ModelSpec.cw(8), 1.0, n_samples=3, master_seed=0)
    assert est.stderr == 0.0
    assert est.extra is None


def test_worker_count_does_not_change_results():
    model = ModelSpec.sk(5)
    one = quenched_average(model, 1.2, "c12*c23", n_samples=12, master_seed=9, workers=1, keep=True)
    many = quenched_average(model, 1.2, "c12*c23", n_samples=12, master_seed=9, workers=4, keep=True)
    assert one == many


def test_observables():
    model = ModelSpec.sk(4)
    assert quenched_average(model, 0.7, "one", n_samples=3, master_seed=0).mean == 1.0
    assert quenched_average(model, 0.0, "c12", n_samples=3, master_seed=0).mean == pytest.approx(0.25)
    energy = quenched_average(model, 0.0, "energy", n_samples=50, master_seed=0)
    # at beta = 0 the thermal energy is the trace term, centred with unit variance
    assert abs(energy.mean) < 5 * energy.stderr

    custom = quenched_average(model, 0.0, lambda real, beta: real.index, n_samples=4, master_seed=0)
    assert custom.mean == 1.5


def test_injected_couplings():
    def flat(model, label):
        return CouplingRealization(model, np.zeros(model.n_couplings()), label)

    est = quenched_pressure(ModelSpec.sk(5), 3.0, n_samples=4, master_seed=0, couplings=flat)
    assert est.mean == pytest.approx(5 * math.log(2.0), rel=1e-14)


def test_capacity_and_model_checks():
    with pytest.raises(CapacityError):
        quenched_average(ModelSpec.sk(30), 1.0, "c12", n_samples=2, master_seed=0)
    with pytest.raises(UnsupportedModelError):
        quenched_average(ModelSpec.cw(6), 1.0, "c12", n_samples=2, master_seed=0, engine="mc")
    with pytest.raises(ArgumentError):
        quenched_average(ModelSpec.sk(4), 1.0, "c12", n_samples=2)
    with pytest.raises(ArgumentError):
        quenched_average(ModelSpec.sk(4), -0.5, "c12", n_samples=2, master_seed=0)
    with pytest.raises(ArgumentError):
        quenched_average(ModelSpec.sk(4), 1.0, "c12", n_samples=0, master_seed=0)
    assert Quench(model=ModelSpec.sk(4), master_seed=0).n_samples() == 500
    assert Quench(model=ModelSpec.sk(4), master_seed=0, engine="mc").n_samples() == 100


class FlakySource(object):
    """
    Rejects the first attempt of sample 0 and reports the seed index.
    """

    name = "flaky"

    def moment(self, real, monomial, beta, tilts=None):
        if real.label.sample_index == 0:
            raise RejectedRun("rejected")
        return float(real.label.sample_index)


def test_rejected_runs_are_replaced(watcher):
    quench = Quench(model=ModelSpec.sk(4), n_samples=3, master_seed=5, source=FlakySource())
    with watcher:
        est = quench.average(lambda real: real.moment("c12", 1.0), keep=True)
    assert est.per_sample == (float(RESERVED_TAIL), 1.0, 2.0)
    assert quench.replaced == [{"index": 0, "replacements": [RESERVED_TAIL]}]
    assert quench.provenance()["engine"] == "flaky"
    assert "replaced by reserved index" in watcher.output


def test_first_index():
    model = ModelSpec.sk(4)
    quench = Quench(model=model, n_samples=2, master_seed=1, first_index=3, source=FlakySource())
    x = quench.map(lambda real: real.moment("c12", 1.0))
    assert np.array_equal(x, [3.0, 4.0])
    assert quench.provenance()["first_index"] == 3


def test_monte_carlo_engine():
    sampler = {"n_rungs": 2, "sweeps_burnin": 100, "sweeps_measure": 512, "check_diagnostics": False}
    model = ModelSpec.sk(5)
    est = quenched_average(model, 0.4, "c12", n_samples=2, master_seed=4, engine="mc", sampler=sampler)
    exact = quenched_average(model, 0.4, "c12", n_samples=2, master_seed=4)
    assert 0.0 < est.mean <= 1.0
    assert abs(est.mean - exact.mean) < 0.1


def test_progress_is_logged(watcher):
    quench = Quench(model=ModelSpec.sk(4), n_samples=3, master_seed=5, source=FlakySource())
    with watcher:
        quench.map(lambda real: real.moment("c12", 1.0))
    assert "disorder samples: 3/3" in watcher.output


def test_set_verbose():
    level = logger.level
    try:
        set_verbose()
        assert logger.level == DEBUG
        set_verbose(False)
        assert logger.level == INFO
    finally:
        logger.setLevel(level)
