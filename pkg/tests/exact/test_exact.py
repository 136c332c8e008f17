# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import csv
import math

import numpy as np
import pytest

from spinstab import (
    ArgumentError,
    Capacity,
    CapacityError,
    ModelSpec,
    OverlapMonomial,
    SeedLabel,
    UnsupportedModelError,
    build_gibbs,
    correlation_matrix,
    cw_observable,
    energy_spectrum,
    histogram_to_csv,
    overlap_moment_bruteforce,
    overlap_moment_exact,
    overlap_pair_distribution,
    overlap_triple_distribution,
    pressure_realization,
    sample_couplings,
    spin_expectation,
    spin_table,
    thermal_expectation,
    walsh_hadamard,
)


def gibbs(model, beta, seed=0, index=0, capacity=None):
    return build_gibbs(sample_couplings(model, SeedLabel(seed, index)), beta, capacity)


def test_capacity():
    real = sample_couplings(ModelSpec.sk(27), SeedLabel(0, 0))
    with pytest.raises(CapacityError) as e:
        energy_spectrum(real)
    assert e.value.engine == "exact-ensemble"
    assert e.value.n_sites == 27

    g = gibbs(ModelSpec.sk(5), 1.0, capacity=Capacity(max_pair_sites=4, max_triple_sites=4))
    with pytest.raises(CapacityError):
        overlap_pair_distribution(g)
    with pytest.raises(CapacityError):
        overlap_moment_exact(g, "c12*c23", method="enumeration")
    # the correlation path is not limited by the pair capacity
    assert overlap_moment_exact(g, "c12") == pytest.approx(overlap_moment_bruteforce(g, "c12"), abs=1e-12)


def test_infinite_temperature_sk():
    n = 6
    g = gibbs(ModelSpec.sk(n), 0.0)
    assert pressure_realization(g.realization, 0.0) == pytest.approx(n * math.log(2.0), abs=1e-12)
    assert overlap_moment_exact(g, "c12") == pytest.approx(1.0 / n, abs=1e-14)
    assert overlap_moment_exact(g, "c12^2") == pytest.approx((3 * n - 2) / n**3, abs=1e-14)
    assert overlap_moment_exact(g, "c12*c23") == pytest.approx(1.0 / n**2, abs=1e-14)
    assert spin_expectation(g, "s0*s1") == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(correlation_matrix(g), np.eye(n), atol=1e-14)


def test_infinite_temperature_ea():
    g = gibbs(ModelSpec.ea(2, 3), 0.0)
    for method in ("correlation", "enumeration"):
        assert overlap_moment_exact(g, "c12", method=method) == pytest.approx(0.0, abs=1e-14)
        assert overlap_moment_exact(g, "c12^2", method=method) == pytest.approx(1.0 / 18, abs=1e-14)


@pytest.mark.parametrize(
    "monomial", ["c12", "c12^2", "c12^3", "c12*c23", "c12*c23*c31", "c12^2*c13", "c12^2*c23^2", "c12*c13*c23^2"]
)
@pytest.mark.parametrize("model", [ModelSpec.sk(5), ModelSpec.ea(2, 2)])
def test_moments_against_bruteforce(model, monomial):
    g = gibbs(model, 1.3, seed=8)
    expected = overlap_moment_bruteforce(g, monomial)
    assert overlap_moment_exact(g, monomial) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("monomial", ["c12", "c12^2", "c12*c23", "c12*c23*c31", "c12^2*c34"])
def test_correlation_and_enumeration_agree(monomial):
    g = gibbs(ModelSpec.sk(6), 0.9, seed=3)
    a = overlap_moment_exact(g, monomial, method="correlation")
    b = overlap_moment_exact(g, monomial, method="enumeration")
    assert a == pytest.approx(b, abs=1e-12)


def test_disconnected_monomial_factorizes():
    g = gibbs(ModelSpec.sk(5), 1.0, seed=2)
    c12 = overlap_moment_exact(g, "c12")
    assert overlap_moment_exact(g, "c12*c34") == pytest.approx(c12 * c12, abs=1e-14)
    assert overlap_moment_exact(g, "1") == 1.0


def test_tilted_moment():
    g = gibbs(ModelSpec.sk(5), 1.0, seed=5)
    h = g.energies / 5
    p = g.probabilities()
    mean_h = float(np.dot(p, h))
    c12 = overlap_moment_exact(g, "c12")
    # tilting a replica absent from the monomial multiplies by omega(h)
    assert overlap_moment_exact(g, "c12", tilts={3: h}) == pytest.approx(c12 * mean_h, abs=1e-12)
    # a constant tilt changes nothing
    assert overlap_moment_exact(g, "c12", tilts={1: np.ones_like(h)}) == pytest.approx(c12, abs=1e-12)
    a = overlap_moment_exact(g, "c12", method="correlation", tilts={1: h})
    b = overlap_moment_exact(g, "c12", method="enumeration", tilts={1: h})
    assert a == pytest.approx(b, abs=1e-12)


def test_moment_limits():
    g = gibbs(ModelSpec.sk(4), 1.0)
    with pytest.raises(ArgumentError):
        overlap_moment_exact(g, "c12^5")
    with pytest.raises(ArgumentError):
        overlap_moment_exact(g, "c12*c23*c34")
    with pytest.raises(ArgumentError):
        overlap_moment_exact(g, "c12^3", method="correlation")
    with pytest.raises(ArgumentError):
        overlap_moment_exact(g, "c12", method="magic")
    with pytest.raises(UnsupportedModelError):
        overlap_moment_exact(gibbs(ModelSpec.cw(4), 1.0), "c12")
    with pytest.raises(ArgumentError):
        build_gibbs(g.realization, -1.0)


def test_pair_distribution():
    g = gibbs(ModelSpec.sk(6), 1.2, seed=4)
    hist = overlap_pair_distribution(g)
    assert hist.denominator == 36
    assert math.fsum(hist.mass) == pytest.approx(1.0, abs=1e-12)
    assert np.all(hist.mass >= 0)
    assert np.all(np.diff(hist.support) > 0)
    assert hist.mean() == pytest.approx(overlap_moment_exact(g, "c12"), abs=1e-12)
    assert hist.moment(2) == pytest.approx(overlap_moment_exact(g, "c12^2"), abs=1e-12)
    assert set(hist.to_dict()) == {"n_replicas", "denominator", "support", "mass"}


def test_triple_distribution():
    g = gibbs(ModelSpec.sk(5), 1.5, seed=6)
    triple = overlap_triple_distribution(g)
    pair = overlap_pair_distribution(g)
    assert triple.n_replicas == 3
    assert math.fsum(triple.joint_mass) == pytest.approx(1.0, abs=1e-12)
    for column in range(3):
        marginal = triple.marginal(column)
        assert np.array_equal(marginal.numerators, pair.numerators)
        assert np.allclose(marginal.mass, pair.mass, atol=1e-12)
    points = triple.joint_numerators / triple.denominator
    e = float(np.sum(triple.joint_mass * points[:, 0] * points[:, 1] * points[:, 2]))
    assert e == pytest.approx(overlap_moment_exact(g, "c12*c23*c31"), abs=1e-12)


def test_thermal_expectation():
    real = sample_couplings(ModelSpec.sk(6), SeedLabel(2, 0))
    beta, h = 0.8, 1e-5
    g = build_gibbs(real, beta)
    assert thermal_expectation(g, np.ones(64)) == pytest.approx(1.0, abs=1e-12)

    spins = spin_table(6, np.arange(64))
    products = spins[:, 0].astype(np.float64) * spins[:, 1]
    assert thermal_expectation(g, products) == pytest.approx(spin_expectation(g, "s0*s1"), abs=1e-12)

    # mean energy is minus the beta derivative of log Z
    slope = (pressure_realization(real, beta + h) - pressure_realization(real, beta - h)) / (2 * h)
    assert thermal_expectation(g, energy_spectrum(real)) == pytest.approx(-slope, abs=1e-5)


def test_histogram_csv(tmp_path):
    g = gibbs(ModelSpec.sk(4), 1.0, seed=1)
    pair = overlap_pair_distribution(g)
    with open(histogram_to_csv(pair, tmp_path / "pair.csv")) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["support", "mass"]
    assert len(rows) == 1 + len(pair.support)
    assert math.fsum(float(r[1]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-12)

    triple = overlap_triple_distribution(g)
    with open(histogram_to_csv(triple, tmp_path / "triple.csv")) as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["c12", "c23", "c31", "mass"]
    assert len(rows) == 1 + len(triple.joint_mass)


def test_walsh_hadamard():
    x = np.arange(8, dtype=np.float64)
    assert np.allclose(walsh_hadamard(walsh_hadamard(x)), 8 * x)
    assert walsh_hadamard(x)[0] == x.sum()
    with pytest.raises(ArgumentError):
        walsh_hadamard(np.ones(6))


@pytest.mark.parametrize("beta", [0.0, 0.7, 1.4])
def test_curie_weiss_against_enumeration(beta):
    n = 7
    g = gibbs(ModelSpec.cw(n), beta)
    assert cw_observable(n, beta, "s0*s1") == pytest.approx(spin_expectation(g, "s0*s1"), abs=1e-12)
    assert cw_observable(n, beta, "s0*s1*s2*s3") == pytest.approx(spin_expectation(g, "s0*s1*s2*s3"), abs=1e-12)
    assert cw_observable(n, beta, 1) == pytest.approx(0.0, abs=1e-12)
    assert cw_observable(n, beta, 3) == pytest.approx(0.0, abs=1e-12)
    assert cw_observable(n, beta, 0) == 1.0


def test_curie_weiss_limits():
    with pytest.raises(ArgumentError):
        cw_observable(8, 1.0, 5)
    with pytest.raises(ArgumentError):
        cw_observable(3, 1.0, 4)


def test_monomial_parsing():
    m = OverlapMonomial.parse("c12*c23^2")
    assert str(m) == "c12*c23^2"
    assert m.degree() == 3
    assert m.replicas() == (1, 2, 3)
    assert m.replica_degree(2) == 3
    assert OverlapMonomial.parse("c21") == OverlapMonomial.of((1, 2))
    assert OverlapMonomial.parse("c") == OverlapMonomial.parse("c12")
    assert OverlapMonomial.parse("c12*c12") == OverlapMonomial.parse("c12^2")
    assert str(OverlapMonomial.parse("c_{1,10}")) == "c_{1,10}"
    assert OverlapMonomial.parse("c34*c45").canonical() == OverlapMonomial.parse("c12*c23")
    assert sorted(str(c) for c in OverlapMonomial.parse("c12*c34*c45").components()) == ["c12", "c34*c45"]
    with pytest.raises(ArgumentError):
        OverlapMonomial.parse("c11")
    with pytest.raises(ArgumentError):
        OverlapMonomial.parse("q12")


def test_low_temperature_stays_finite():
    real = sample_couplings(ModelSpec.sk(10), SeedLabel(12, 0))
    g = build_gibbs(real, 50.0)
    ground = float(np.min(g.energies))
    assert math.isfinite(g.log_z)
    assert -50.0 * ground <= g.log_z <= -50.0 * ground + math.log(1 << 10)
    p = g.probabilities()
    assert np.all(np.isfinite(p))
    assert p.sum() == pytest.approx(1.0, abs=1e-12)
    # the two ground states carry the same weight
    top = np.argsort(p)[-2:]
    assert top[0] ^ top[1] == (1 << 10) - 1
    q2 = overlap_moment_exact(g, "c12^2")
    assert 0.0 < q2 <= 1.0 + 1e-12
