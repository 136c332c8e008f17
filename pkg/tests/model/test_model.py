# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import math

import numpy as np
import pytest

from spinstab import (
    PAIRS,
    ArgumentError,
    CouplingRealization,
    Family,
    ModelSpec,
    SeedLabel,
    SpinConfiguration,
    UnsupportedModelError,
    checkerboard,
    energies,
    energy,
    interaction_matrix,
    lattice_edges,
    overlap,
    overlap_numerators,
    sample_couplings,
    spin_table,
    stream,
    verify_covariance,
)


def random_configuration(rng, n):
    return SpinConfiguration.from_spins(2 * rng.integers(0, 2, size=n) - 1)


def test_spin_configuration_packing():
    c = SpinConfiguration.from_spins([1, -1, -1, 1, 1])
    assert c.bits == 0b11001
    assert list(c.spins()) == [1, -1, -1, 1, 1]
    assert c.flip().bits == 0b00110

    with pytest.raises(ArgumentError):
        SpinConfiguration(0b100, 2)
    with pytest.raises(ArgumentError):
        SpinConfiguration.from_spins([1, 0, -1])


def test_model_spec():
    assert ModelSpec.sk(6).n_couplings() == 36
    ea = ModelSpec.ea(2, 3)
    assert ea.n_sites == 9
    assert ea.n_couplings() == 18
    assert len(lattice_edges(ModelSpec.ea(2, 3, periodic=False))) == 12

    d = ea.to_dict()
    assert d == {"family": "EA", "n_sites": 9, "lattice": {"dimension": 2, "side": 3, "periodic": True}}
    assert ModelSpec.from_dict(d) == ea
    assert ModelSpec.from_dict({"family": "sk", "n_sites": 5}) == ModelSpec.sk(5)
    assert ea.resized(16) == ModelSpec.ea(2, 4)

    with pytest.raises(ArgumentError):
        ModelSpec(Family.EA, 10, 2)
    with pytest.raises(ArgumentError):
        ModelSpec(Family.SK, 0)


def test_checkerboard():
    assert checkerboard(ModelSpec.sk(4)) is None
    assert checkerboard(ModelSpec.ea(2, 3)) is None
    colours = checkerboard(ModelSpec.ea(2, 4))
    for i, j in lattice_edges(ModelSpec.ea(2, 4)):
        assert colours[i] != colours[j]


def test_overlap_sk():
    rng = np.random.default_rng(1)
    m = ModelSpec.sk(7)
    a = random_configuration(rng, 7)
    assert overlap(m, a, a) == 1.0
    assert overlap(m, a, a.flip()) == 1.0
    b = random_configuration(rng, 7)
    q = float(np.dot(a.spins(), b.spins())) / 7
    assert overlap(m, a, b) == pytest.approx(q * q, abs=1e-15)
    assert overlap_numerators(m, [a.bits ^ b.bits])[0] == round(49 * q * q)


def test_overlap_ea():
    m = ModelSpec.ea(2, 3)
    a = SpinConfiguration.from_spins(np.ones(9, dtype=int))
    assert overlap(m, a, a) == 1.0
    rng = np.random.default_rng(2)
    b = random_configuration(rng, 9)
    num = overlap_numerators(m, [a.bits ^ b.bits])[0]
    assert overlap(m, a, b) == num / 18


def test_couplings_are_reproducible():
    m = ModelSpec.sk(5)
    a = sample_couplings(m, SeedLabel(11, 3))
    b = sample_couplings(m, (11, 3))
    c = sample_couplings(m, SeedLabel(11, 4))
    assert np.array_equal(a.couplings, b.couplings)
    assert not np.array_equal(a.couplings, c.couplings)
    assert not a.couplings.flags.writeable

    assert sample_couplings(ModelSpec.cw(5), SeedLabel(0, 0)).couplings.size == 0
    with pytest.raises(ArgumentError):
        CouplingRealization(m, np.zeros(3))
    with pytest.raises(ValueError):
        SeedLabel(-1, 0)


def test_streams_are_independent():
    x = stream(SeedLabel(5, 0), PAIRS).random(4)
    y = stream(SeedLabel(5, 0), PAIRS).random(4)
    z = stream(SeedLabel(5, 0)).random(4)
    assert np.array_equal(x, y)
    assert not np.array_equal(x, z)


@pytest.mark.parametrize("model", [ModelSpec.sk(4), ModelSpec.sk(9), ModelSpec.ea(2, 3), ModelSpec.ea(3, 2)])
def test_covariance(model):
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = random_configuration(rng, model.n_sites)
        b = random_configuration(rng, model.n_sites)
        analytic, target = verify_covariance(model, a, b)
        assert analytic == pytest.approx(target, abs=1e-12)

    with pytest.raises(UnsupportedModelError):
        verify_covariance(ModelSpec.cw(4), a, b)


def test_energy_sk():
    m = ModelSpec.sk(4)
    real = sample_couplings(m, SeedLabel(0, 0))
    s = np.array([1, -1, 1, 1])
    expected = float(s @ real.couplings @ s) / math.sqrt(4)
    assert energy(real, SpinConfiguration.from_spins(s)) == pytest.approx(expected, abs=1e-12)


def test_energy_cw():
    real = sample_couplings(ModelSpec.cw(6), SeedLabel(0, 0))
    up = SpinConfiguration.from_spins(np.ones(6, dtype=int))
    assert energy(real, up) == pytest.approx(-3.0)
    assert energy(real, SpinConfiguration.from_spins([1, -1, 1, -1, 1, -1])) == 0.0


@pytest.mark.parametrize("model", [ModelSpec.sk(6), ModelSpec.ea(2, 4)])
def test_interaction_matrix(model):
    real = sample_couplings(model, SeedLabel(4, 2))
    W, const = interaction_matrix(real)
    s = spin_table(model.n_sites, np.arange(32)).astype(np.float64)
    quadratic = np.einsum("bi,bi->b", s, np.asarray(W @ s.T).T)
    assert np.allclose(const + 0.5 * quadratic, energies(real, s), atol=1e-12)


@pytest.mark.parametrize(
    "model", [ModelSpec.sk(7), ModelSpec.ea(2, 3), ModelSpec.ea(1, 5, periodic=False), ModelSpec.cw(6)]
)
def test_energy_is_even_under_global_flip(model):
    real = sample_couplings(model, SeedLabel(9, 1))
    rng = np.random.default_rng(9)
    for _ in range(10):
        s = random_configuration(rng, model.n_sites)
        assert s.flip().flip() == s
        assert np.array_equal(s.flip().spins(), -s.spins())
        assert energy(real, s.flip()) == pytest.approx(energy(real, s), abs=1e-12)
    spins = spin_table(model.n_sites, np.arange(1 << model.n_sites))
    assert np.allclose(energies(real, spins), energies(real, -spins), atol=1e-12)
