# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import numpy as np
import pytest

from spinstab import (
    ASYMPTOTIC,
    DISTRIBUTIONAL,
    EXACTNESS,
    EXPLORATORY,
    ArgumentError,
    ModelSpec,
    QuenchedEstimate,
    ScalingReport,
    UnsupportedModelError,
    beta_grid,
    classical_shift_check,
    cw_factorization_check,
    deformation_shift_gap,
    fluctuation_scan,
    gg_residual,
    replica_equivalence_residual,
    residual_scan,
    stability_derivative,
    temperature_shift_equivalence,
    ultrametricity_metric,
)
from spinstab.identities import _violations


@pytest.mark.parametrize("n", [4, 5, 6])
def test_ghirlanda_guerra_infinite_temperature(n):
    report = gg_residual(ModelSpec.sk(n), n, 2, "c12", beta=0.0, n_samples=3, seed=1)
    assert report.residual == pytest.approx(-(n - 1) / n**3, abs=1e-13)
    assert report.residual_stderr == 0.0
    assert report.lhs.mean == pytest.approx(1.0 / n**2, abs=1e-13)
    assert report.tier == ASYMPTOTIC
    assert report.to_dict()["kind"] == "identity"


def test_ghirlanda_guerra_single_replica():
    # n = 1: E[c12] = E[c12], the identity holds trivially
    report = gg_residual(ModelSpec.sk(5), 5, 1, "1", beta=1.0, n_samples=4, seed=2)
    assert report.residual == pytest.approx(0.0, abs=1e-14)


def test_ghirlanda_guerra_interval():
    report = gg_residual(ModelSpec.sk(4), 4, 2, "c12", beta_interval=[0.5, 1.5], n_samples=3, seed=1, grid_points=5)
    assert len(report.metadata["beta_grid"]) == 9
    assert report.beta == (0.5, 1.5)
    assert report.to_dict()["beta"] == [0.5, 1.5]
    assert report.metadata["smoothing"] == "uniform grid average"


def test_ghirlanda_guerra_arguments():
    with pytest.raises(ArgumentError):
        gg_residual(ModelSpec.sk(4), 4, 2, "c13", beta=1.0, n_samples=2, seed=0)
    with pytest.raises(ArgumentError):
        gg_residual(ModelSpec.sk(4), 4, 2, "c12", n_samples=2, seed=0)
    with pytest.raises(ArgumentError):
        gg_residual(ModelSpec.sk(4), 4, 2, "c12", beta=1.0, power=0, n_samples=2, seed=0)
    with pytest.raises(ArgumentError):
        beta_grid(beta_interval=[1.0, 0.5])


def test_ghirlanda_guerra_power():
    # E[c12^2 c13^2] at beta = 0 factorizes into E[c^2]^2
    n = 4
    report = gg_residual(ModelSpec.sk(n), n, 2, "c12^2", beta=0.0, power=2, n_samples=2, seed=0)
    q4 = (3 * n - 2) / n**3
    assert report.lhs.mean == pytest.approx(q4 * q4, abs=1e-13)


@pytest.mark.parametrize(
    "which, factor",
    [("12-23", 1.0), ("12-34", 2.0 / 3.0)],
)
def test_replica_equivalence_infinite_temperature(which, factor):
    n = 5
    report = replica_equivalence_residual(ModelSpec.sk(n), n, which=which, moments=(1, 1), beta=0.0, n_samples=2,
                                          seed=3)
    assert report.residual == pytest.approx(-factor * (n - 1) / n**3, abs=1e-13)


def test_replica_equivalence_arguments():
    with pytest.raises(ArgumentError):
        replica_equivalence_residual(ModelSpec.sk(4), 4, which="13-24", n_samples=2, seed=0)
    with pytest.raises(ArgumentError):
        replica_equivalence_residual(ModelSpec.sk(4), 4, moments=(3, 1), n_samples=2, seed=0)


def test_classical_shift_is_exact():
    for model in (ModelSpec.sk(6), ModelSpec.cw(8), ModelSpec.ea(2, 3)):
        report = classical_shift_check(model, model.n_sites, 0.5, 1.2, "s0*s1", seed=4)
        assert report.tier == EXACTNESS
        assert report.mode == "single"
        assert report.passed
        assert abs(report.residual) < 1e-10
    with pytest.raises(ArgumentError):
        classical_shift_check(ModelSpec.sk(4), 4, 0.5, 1.0, "s0*s7")


def test_stability_derivative():
    report = stability_derivative(ModelSpec.sk(5), 5, "c12", 0.8, lambda_step=1e-3, n_samples=4, seed=6)
    assert abs(report.residual) < 1e-5
    assert report.metadata["n_replicas"] == 2
    assert report.metadata["deformed_plus"]["mean"] > 0


def test_stability_derivative_is_second_order():
    # central differences: shrinking the step tenfold shrinks the gap a hundredfold
    coarse = stability_derivative(ModelSpec.sk(5), 5, "c12", 0.8, lambda_step=1e-2, n_samples=4, seed=6)
    fine = stability_derivative(ModelSpec.sk(5), 5, "c12", 0.8, lambda_step=1e-3, n_samples=4, seed=6)
    assert coarse.lhs.mean == pytest.approx(fine.lhs.mean, rel=1e-12)
    assert 80.0 <= coarse.residual / fine.residual <= 120.0


def test_stability_derivative_extra_replicas():
    # replicas absent from f still carry their Hamiltonian in the deformation
    report = stability_derivative(ModelSpec.sk(4), 4, "c12", 1.0, n_samples=3, seed=1, n_replicas=3)
    assert abs(report.residual) < 1e-5
    with pytest.raises(ArgumentError):
        stability_derivative(ModelSpec.sk(4), 4, "c12*c23", 1.0, n_samples=2, seed=1, n_replicas=2)


def test_deformation_shift_gap():
    zero = deformation_shift_gap(ModelSpec.sk(5), 5, "c12", 1.0, 0.0, n_samples=3, seed=2)
    assert abs(zero.residual) < 1e-12
    assert zero.tier == EXPLORATORY
    gap = deformation_shift_gap(ModelSpec.sk(5), 5, "c12", 1.0, 2.0, n_samples=3, seed=2)
    assert np.isfinite(gap.residual)


def test_temperature_shift_equivalence():
    report = temperature_shift_equivalence(ModelSpec.sk(5), 5, 1.0, 1.0, n_samples=40, seed=3)
    assert report.mode == "independent"
    assert report.tier == DISTRIBUTIONAL
    assert report.metadata["provenance"]["rhs"]["first_index"] == 40
    assert report.metadata["shifted_beta"] == pytest.approx((1.0 + 1.0 / 5) ** 0.5)
    assert abs(report.residual) < 5 * report.residual_stderr

    with pytest.raises(ArgumentError):
        temperature_shift_equivalence(ModelSpec.sk(5), 5, 1.0, -0.5, n_samples=2, seed=0)
    with pytest.raises(UnsupportedModelError):
        temperature_shift_equivalence(ModelSpec.cw(5), 5, 1.0, 0.5, n_samples=2, seed=0)


def test_ultrametricity_metric():
    report = ultrametricity_metric(ModelSpec.sk(5), 5, 1.0, n_samples=3, seed=1, eps_grid=(0.05, 0.2))
    assert set(report.violation) == {0.05, 0.2}
    for est in report.violation.values():
        assert 0.0 <= est.mean <= 1.0
    assert report.violation[0.2].mean <= report.violation[0.05].mean + 1e-12
    assert report.gap.mean >= 0.0
    d = report.to_dict()
    assert d["kind"] == "ultrametricity"
    assert d["passed"] is None


def test_violations_of_ultrametric_triples():
    points = np.array([[0.5, 0.5, 0.5], [0.2, 0.6, 0.2], [0.1, 0.9, 0.9]])
    weights = np.array([0.5, 0.3, 0.2])
    row = _violations(points, weights, [0.05])
    # only the last triple has a strictly smallest overlap, in column 0
    assert row[:3] == [pytest.approx(0.2), 0.0, 0.0]
    assert row[3] == pytest.approx(0.2 * 0.8**2)


def test_violations_of_independent_overlaps():
    # no column is favoured, and the two smallest of three uniforms differ by Beta(1, 3)
    rng = np.random.default_rng(17)
    points = rng.uniform(size=(60000, 3))
    row = _violations(points, np.full(60000, 1.0 / 60000), [0.0, 0.1])
    assert row[:3] == [pytest.approx(1.0 / 3, abs=0.01)] * 3
    assert all(v < row[0] for v in row[3:6])
    assert row[6] == pytest.approx(0.1, abs=0.005)


def test_ultrametricity_sampled_against_enumerated():
    sampler = {"sweeps_burnin": 10, "sweeps_measure": 2048, "check_diagnostics": False}
    eps_grid = (0.0, 0.2, 0.5)
    exact = ultrametricity_metric(ModelSpec.sk(5), 5, 0.0, n_samples=3, seed=2, eps_grid=eps_grid)
    mc = ultrametricity_metric(
        ModelSpec.sk(5), 5, 0.0, n_samples=3, seed=2, eps_grid=eps_grid, engine="mc", sampler=sampler
    )
    for eps in eps_grid:
        assert mc.violation[eps].mean == pytest.approx(exact.violation[eps].mean, abs=0.03)
    assert mc.gap.mean == pytest.approx(exact.gap.mean, abs=0.03)


def test_curie_weiss_factorization():
    hot = cw_factorization_check([8, 16, 32, 64], 0.5)
    residuals = np.abs(hot.means())
    assert np.all(np.diff(residuals) < 0)
    # paramagnetic decay is 1/N^2, reported rather than asserted against 1
    assert hot.metadata["phase"] == "paramagnetic"
    assert 1.5 <= hot.metadata["exponent"] <= 2.5

    cold = cw_factorization_check([8, 16, 32, 64], 2.0)
    assert 0.7 <= cold.fit["exponent"] <= 1.3
    assert cold.metadata["exponent"] == cold.fit["exponent"]
    assert cold.metadata["phase"] == "ordered"
    assert "warning" not in cold.metadata

    critical = cw_factorization_check([8, 16, 32], 1.02)
    assert critical.metadata["warning"]


def test_curie_weiss_infinite_temperature():
    report = cw_factorization_check([16, 64, 1024, 2**14], 0.0)
    assert np.all(report.means() == 0.0)
    assert np.all(report.stderrs() == 0.0)
    assert "exponent" not in report.fit
    assert report.metadata["exponent"] is None


def test_fluctuation_scan():
    thermal, disorder = fluctuation_scan(ModelSpec.sk(4), 0.0, [4, 5, 6], n_samples=200, seed=8)
    for n, est in zip(thermal.n_grid, thermal.values):
        assert abs(est.mean - (n - 1)) < 5 * est.stderr
    for est in disorder.values:
        assert abs(est.mean - 1.0) < 5 * est.stderr + 0.05
    assert thermal.metadata["ratio_bounded"]
    assert thermal.fit["intercept"] == 0.0
    assert thermal.identity_name == "thermal_fluctuation"
    assert disorder.identity_name == "disorder_fluctuation"


def test_residual_scan():
    scan = residual_scan("gg_residual", ModelSpec.sk(4), [4, 5, 6], n_replicas=2, f="c12", beta=0.0, n_samples=2,
                         seed=0)
    expected = [-(n - 1) / n**3 for n in (4, 5, 6)]
    assert np.allclose(scan.means(), expected, atol=1e-13)
    assert scan.metadata["non_increasing"]
    assert scan.metadata["shrinks"]
    assert len(scan.metadata["reports"]) == 3
    assert scan.fit["exponent"] == pytest.approx(2.0, abs=0.5)

    with pytest.raises(ArgumentError):
        residual_scan("gg_residual", ModelSpec.sk(4), [4, 5], n_replicas=2, f="c12", beta=0.0, n_samples=2, seed=0)
    with pytest.raises(ArgumentError):
        residual_scan("gg_residual", ModelSpec.sk(4), [4, 5, 6], quantity="bogus", n_replicas=2, f="c12", beta=0.0,
                      n_samples=2, seed=0)


def test_scaling_report_grid():
    values = [QuenchedEstimate.exact(1.0)] * 3
    with pytest.raises(ArgumentError):
        ScalingReport("x", {}, (4, 6, 5), values, {})
    report = ScalingReport("x", {}, [4, 5, 6], values, {"slope": 0.5})
    assert report.fit_slope == 0.5
    assert report.rows() == [(4, 1.0, 0.0), (5, 1.0, 0.0), (6, 1.0, 0.0)]
