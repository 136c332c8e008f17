# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Spin configurations, model specifications and Gaussian Hamiltonians.

Three model families are supported:

* ``SK``: H = (1/sqrt(N)) sum_{i,j} J_ij s_i s_j over all ordered pairs,
  including the diagonal, so that Av(H(s)H(t)) = N q(s,t)^2 exactly;
* ``EA``: H = (1/sqrt(d)) sum_e J_e s_i s_j over the undirected nearest
  neighbour edges of a d-dimensional lattice of side L, with overlap
  c(s,t) = (1/dN) sum_e s_i s_j t_i t_j;
* ``CW``: the deterministic Curie-Weiss Hamiltonian H = -(N/2) m^2.

Configurations are packed into integers, bit i set meaning s_i = +1.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ArgumentError, UnsupportedModelError
from .rng import COUPLINGS, SeedLabel, stream

__all__ = [
    "Family",
    "ModelSpec",
    "SpinConfiguration",
    "CouplingRealization",
    "MAX_MC_SITES",
    "overlap",
    "overlap_denominator",
    "overlap_numerators",
    "sample_couplings",
    "energy",
    "energies",
    "verify_covariance",
    "coupling_scale",
    "coupling_features",
    "lattice_edges",
    "interaction_matrix",
    "spin_table",
    "checkerboard",
]

MAX_MC_SITES = 2**20


class Family(str, Enum):
    SK = "SK"
    EA = "EA"
    CW = "CW"

    def gaussian(self):
        return self is not Family.CW


@dataclass(frozen=True)
class ModelSpec:
    """
    Declarative description of a model family and its size.

    For ``EA`` the lattice is described by ``dimension`` and ``side`` with
    ``n_sites == side ** dimension``; ``periodic`` selects the boundaries.
    """

    family: Family
    n_sites: int
    dimension: int = None
    side: int = None
    periodic: bool = True

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.n_sites < 1:
            raise ArgumentError("n_sites must be positive, got %d" % self.n_sites)
        if self.family is Family.EA:
            if self.dimension is None or self.dimension < 1:
                raise ArgumentError("EA models need a lattice dimension >= 1")
            if self.side is None:
                object.__setattr__(
                    self, "side", _lattice_side(self.n_sites, self.dimension)
                )
            if self.side < 2:
                raise ArgumentError("EA lattice side must be at least 2")
            if self.side**self.dimension != self.n_sites:
                raise ArgumentError(
                    "EA lattice %d^%d does not hold N = %d sites"
                    % (self.side, self.dimension, self.n_sites)
                )
        elif self.dimension is not None or self.side is not None:
            raise ArgumentError("%s models take no lattice" % self.family.value)

    @classmethod
    def sk(cls, n_sites):
        return cls(Family.SK, n_sites)

    @classmethod
    def cw(cls, n_sites):
        return cls(Family.CW, n_sites)

    @classmethod
    def ea(cls, dimension, side, periodic=True):
        return cls(Family.EA, side**dimension, dimension, side, periodic)

    def resized(self, n_sites):
        """
        The same family at another size (EA keeps its dimension).
        """
        if self.family is Family.EA:
            return ModelSpec(
                Family.EA, n_sites, self.dimension, periodic=self.periodic
            )
        return ModelSpec(self.family, n_sites)

    def n_couplings(self):
        if self.family is Family.SK:
            return self.n_sites**2
        if self.family is Family.EA:
            return len(lattice_edges(self))
        return 0

    def to_dict(self):
        d = {"family": self.family.value, "n_sites": self.n_sites}
        if self.family is Family.EA:
            d["lattice"] = {
                "dimension": self.dimension,
                "side": self.side,
                "periodic": self.periodic,
            }
        return d

    @classmethod
    def from_dict(cls, d):
        lattice = d.get("lattice") or {}
        return cls(
            Family(str(d["family"]).upper()),
            int(d["n_sites"]),
            lattice.get("dimension"),
            lattice.get("side"),
            bool(lattice.get("periodic", True)),
        )


def _lattice_side(n_sites, dimension):
    side = int(round(n_sites ** (1.0 / dimension)))
    for s in (side - 1, side, side + 1):
        if s >= 1 and s**dimension == n_sites:
            return s
    raise ArgumentError(
        "N = %d is not a perfect %d-th power, no EA lattice fits" % (n_sites, dimension)
    )


@dataclass(frozen=True)
class SpinConfiguration:
    bits: int
    n_sites: int

    def __post_init__(self):
        if not 1 <= self.n_sites <= MAX_MC_SITES:
            raise ArgumentError("n_sites must be in [1, 2^20], got %d" % self.n_sites)
        if self.bits < 0 or self.bits >> self.n_sites:
            raise ArgumentError("bits beyond position N-1 must be zero")

    @classmethod
    def from_spins(cls, spins):
        arr = np.asarray(spins)
        if arr.ndim != 1 or not np.all(np.abs(arr) == 1):
            raise ArgumentError("spins must be a flat sequence of +1/-1")
        packed = np.packbits(arr > 0, bitorder="little")
        return cls(int.from_bytes(packed.tobytes(), "little"), arr.size)

    @property
    def index(self):
        return self.bits

    def spins(self):
        nbytes = (self.n_sites + 7) // 8
        raw = np.frombuffer(self.bits.to_bytes(nbytes, "little"), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[: self.n_sites]
        return (2 * bits.astype(np.int8) - 1).astype(np.int8)

    def flip(self):
        return SpinConfiguration(self.bits ^ ((1 << self.n_sites) - 1), self.n_sites)


@dataclass(frozen=True, eq=False)
class CouplingRealization:
    """
    One draw of the Gaussian disorder. ``couplings`` is read-only: an (N, N)
    matrix for SK, one value per lattice edge for EA, empty for CW.
    """

    model: ModelSpec
    couplings: np.ndarray = field(repr=False)
    seed_label: SeedLabel = None

    def __post_init__(self):
        arr = np.array(self.couplings, dtype=np.float64)
        arr.flags.writeable = False
        object.__setattr__(self, "couplings", arr)
        if arr.size != self.model.n_couplings():
            raise ArgumentError(
                "%s with N = %d needs %d couplings, got %d"
                % (
                    self.model.family.value,
                    self.model.n_sites,
                    self.model.n_couplings(),
                    arr.size,
                )
            )

    @property
    def n_sites(self):
        return self.model.n_sites


_EDGE_CACHE = {}


def lattice_edges(model):
    """
    Undirected nearest-neighbour edges as an (E, 2) array. Edges are listed
    dimension by dimension, each site linked to its +1 neighbour; with
    periodic boundaries E = dN exactly.
    """
    if model.family is not Family.EA:
        raise UnsupportedModelError("only EA models live on a lattice")
    key = (model.dimension, model.side, model.periodic)
    if key not in _EDGE_CACHE:
        shape = (model.side,) * model.dimension
        sites = np.arange(model.n_sites)
        coords = np.array(np.unravel_index(sites, shape))
        edges = []
        for k in range(model.dimension):
            nb = coords.copy()
            nb[k] = (nb[k] + 1) % model.side
            target = np.ravel_multi_index(tuple(nb), shape)
            keep = np.ones(model.n_sites, dtype=bool)
            if not model.periodic:
                keep = coords[k] < model.side - 1
            edges.append(np.stack([sites[keep], target[keep]], axis=1))
        out = np.concatenate(edges).astype(np.int64)
        out.flags.writeable = False
        _EDGE_CACHE[key] = out
    return _EDGE_CACHE[key]


def checkerboard(model):
    """
    Site parity on the lattice, or None when an odd periodic side spoils it.
    """
    if model.family is not Family.EA:
        return None
    if model.periodic and model.side % 2:
        return None
    coords = np.array(np.unravel_index(np.arange(model.n_sites), (model.side,) * model.dimension))
    return coords.sum(axis=0) % 2


def _check_sizes(model, *configs):
    for c in configs:
        if c.n_sites != model.n_sites:
            raise ArgumentError(
                "configuration has %d sites, model has %d" % (c.n_sites, model.n_sites)
            )


def overlap_denominator(model):
    """
    Integer denominator of the overlap: N^2 for SK, dN for EA.
    """
    if model.family is Family.SK:
        return model.n_sites**2
    if model.family is Family.EA:
        return model.dimension * model.n_sites
    raise UnsupportedModelError("overlaps are defined for the Gaussian models only")


def overlap_numerators(model, xor_patterns):
    """
    Integer overlap numerators for an array of XOR patterns ``s ^ t``.

    The overlap of both Gaussian models depends on the two configurations
    only through which sites disagree.
    """
    x = np.asarray(xor_patterns, dtype=np.int64)
    if model.family is Family.SK:
        k = model.n_sites - 2 * np.bitwise_count(x).astype(np.int64)
        return k * k
    if model.family is Family.EA:
        edges = lattice_edges(model)
        disagree = np.zeros(x.shape, dtype=np.int64)
        for i, j in edges:
            disagree += ((x >> i) ^ (x >> j)) & 1
        return len(edges) - 2 * disagree
    raise UnsupportedModelError("overlaps are defined for the Gaussian models only")


def overlap(model, a, b):
    """
    The model overlap c_N(a, b), exact up to the final division.
    """
    _check_sizes(model, a, b)
    if model.family is Family.SK:
        k = model.n_sites - 2 * (a.bits ^ b.bits).bit_count()
        return (k * k) / overlap_denominator(model)
    if model.family is Family.EA:
        sa = a.spins().astype(np.int64)
        sb = b.spins().astype(np.int64)
        edges = lattice_edges(model)
        num = int(np.sum(sa[edges[:, 0]] * sa[edges[:, 1]] * sb[edges[:, 0]] * sb[edges[:, 1]]))
        return num / overlap_denominator(model)
    raise UnsupportedModelError("overlaps are defined for the Gaussian models only")


def coupling_scale(model):
    if model.family is Family.SK:
        return 1.0 / math.sqrt(model.n_sites)
    if model.family is Family.EA:
        return 1.0 / math.sqrt(model.dimension)
    raise UnsupportedModelError("CW has no Gaussian couplings")


def coupling_features(model, spins):
    """
    Spin products multiplying each coupling slot, shape (B, n_couplings).
    """
    s = np.atleast_2d(np.asarray(spins, dtype=np.float64))
    if model.family is Family.SK:
        return (s[:, :, None] * s[:, None, :]).reshape(s.shape[0], -1)
    if model.family is Family.EA:
        edges = lattice_edges(model)
        return s[:, edges[:, 0]] * s[:, edges[:, 1]]
    raise UnsupportedModelError("CW has no Gaussian couplings")


def sample_couplings(model, seed_label, kind=COUPLINGS):
    """
    Draw i.i.d. standard normal couplings; a pure function of ``seed_label``.
    """
    if not isinstance(seed_label, SeedLabel):
        seed_label = SeedLabel(*seed_label)
    if model.family is Family.CW:
        return CouplingRealization(model, np.zeros(0), seed_label)
    rng = stream(seed_label, kind)
    if model.family is Family.SK:
        values = rng.standard_normal((model.n_sites, model.n_sites))
    else:
        values = rng.standard_normal(model.n_couplings())
    return CouplingRealization(model, values, seed_label)


def spin_table(n_sites, indices):
    """
    +1/-1 spins (int8, shape (B, N)) for an array of packed configurations.
    """
    idx = np.asarray(indices, dtype=np.int64)
    bits = (idx[:, None] >> np.arange(n_sites, dtype=np.int64)) & 1
    return (2 * bits - 1).astype(np.int8)


def energies(real, spins):
    """
    Vectorized Hamiltonian for a (B, N) array of +1/-1 spins.
    """
    model = real.model
    s = np.atleast_2d(np.asarray(spins, dtype=np.float64))
    if s.shape[1] != model.n_sites:
        raise ArgumentError(
            "configurations have %d sites, model has %d" % (s.shape[1], model.n_sites)
        )
    if model.family is Family.SK:
        return coupling_scale(model) * np.einsum("bi,ij,bj->b", s, real.couplings, s)
    if model.family is Family.EA:
        return coupling_scale(model) * (coupling_features(model, s) @ real.couplings)
    m = s.sum(axis=1) / model.n_sites
    return -0.5 * model.n_sites * m * m


def energy(real, s):
    _check_sizes(real.model, s)
    return float(energies(real, s.spins()[None, :])[0])


def verify_covariance(model, a, b):
    """
    Closed-form Av(H(a) H(b)) from the coupling layout against N c(a, b).

    Every slot has unit variance, so the covariance is the sum over slots of
    scale^2 times the product of the spin products of ``a`` and ``b``.
    """
    if not model.family.gaussian():
        raise UnsupportedModelError("CW is not a Gaussian model")
    _check_sizes(model, a, b)
    fa = coupling_features(model, a.spins()[None, :])[0]
    fb = coupling_features(model, b.spins()[None, :])[0]
    analytic = coupling_scale(model) ** 2 * float(np.dot(fa, fb))
    target = model.n_sites * overlap(model, a, b)
    return analytic, target


def interaction_matrix(real):
    """
    Symmetric W with zero diagonal and a constant such that
    H(s) = const + s^T W s / 2. Dense for SK, CSR sparse for EA.
    """
    model = real.model
    scale = coupling_scale(model)
    if model.family is Family.SK:
        J = real.couplings
        W = scale * (J + J.T)
        np.fill_diagonal(W, 0.0)
        return W, scale * float(np.trace(J))
    from scipy import sparse

    edges = lattice_edges(model)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = scale * np.concatenate([real.couplings, real.couplings])
    W = sparse.csr_matrix((data, (rows, cols)), shape=(model.n_sites, model.n_sites))
    return W, 0.0
