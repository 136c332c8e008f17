# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Exact Gibbs measures by complete enumeration of the 2^N configurations.

Weights are kept in the log domain. Multi-replica overlap statistics use the
fact that for SK and EA the overlap c(s, t) depends only on the XOR pattern
x = s ^ t: the two-replica law is the XOR autocorrelation of the Gibbs
probabilities (computed with a Walsh-Hadamard transform) and the
three-replica law is T(x, y) = sum_s p(s) p(s ^ x) p(s ^ y).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ArgumentError, CapacityError, UnsupportedModelError
from .model import (
    coupling_features,
    energies,
    overlap_denominator,
    overlap_numerators,
    spin_table,
)
from .monomial import ONE, OverlapMonomial, SpinMonomial

__all__ = [
    "Capacity",
    "DEFAULT_CAPACITY",
    "GibbsEnsemble",
    "OverlapHistogram",
    "as_beta",
    "energy_spectrum",
    "build_gibbs",
    "gibbs_from_spectrum",
    "pressure_realization",
    "thermal_expectation",
    "spin_expectation",
    "correlation_matrix",
    "overlap_moment_exact",
    "overlap_moment_bruteforce",
    "overlap_pair_distribution",
    "overlap_triple_distribution",
    "cw_observable",
    "walsh_hadamard",
]

BLOCK = 1 << 15


@dataclass(frozen=True)
class Capacity:
    """
    Largest N handled by each exact computation. The defaults fit a desktop;
    raise them through the ``capacity`` section of an experiment config.
    """

    max_ensemble_sites: int = 26
    max_pair_sites: int = 13
    max_triple_sites: int = 9

    def check(self, what, n_sites):
        limit = {
            "ensemble": self.max_ensemble_sites,
            "pair": self.max_pair_sites,
            "triple": self.max_triple_sites,
        }[what]
        if n_sites > limit:
            hint = "use the mc engine" if what == "ensemble" else None
            raise CapacityError("exact-" + what, n_sites, limit, hint)


DEFAULT_CAPACITY = Capacity()


def as_beta(value):
    try:
        beta = float(value)
    except (TypeError, ValueError):
        raise ArgumentError("inverse temperature must be a number, got %r" % (value,))
    if not math.isfinite(beta) or beta < 0:
        raise ArgumentError("inverse temperature must be finite and >= 0, got %r" % value)
    return beta


@dataclass(frozen=True, eq=False)
class GibbsEnsemble:
    """
    Exact Gibbs measure of one realization at inverse temperature ``beta``.
    """

    realization: object
    beta: float
    energies: np.ndarray = field(repr=False)
    log_weights: np.ndarray = field(repr=False)
    log_z: float
    capacity: Capacity = DEFAULT_CAPACITY
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def model(self):
        return self.realization.model

    @property
    def n_sites(self):
        return self.realization.model.n_sites

    def probabilities(self):
        if "p" not in self._cache:
            p = np.exp(self.log_weights - self.log_z)
            p.flags.writeable = False
            self._cache["p"] = p
        return self._cache["p"]


def energy_spectrum(real, capacity=None):
    """
    H(s) for every configuration, indexed by the packed spin word.
    """
    capacity = capacity or DEFAULT_CAPACITY
    n = real.model.n_sites
    capacity.check("ensemble", n)
    size = 1 << n
    out = np.empty(size, dtype=np.float64)
    for start in range(0, size, BLOCK):
        idx = np.arange(start, min(size, start + BLOCK), dtype=np.int64)
        out[start : start + idx.size] = energies(real, spin_table(n, idx))
    out.flags.writeable = False
    return out


def gibbs_from_spectrum(real, spectrum, beta, capacity=None):
    """
    Ensemble at any finite ``beta`` (negative values allowed, as needed by
    deformed states) from a precomputed energy spectrum.
    """
    beta = float(beta)
    if not math.isfinite(beta):
        raise ArgumentError("inverse temperature must be finite")
    log_weights = -beta * spectrum
    return GibbsEnsemble(
        realization=real,
        beta=beta,
        energies=spectrum,
        log_weights=log_weights,
        log_z=float(logsumexp(log_weights)),
        capacity=capacity or DEFAULT_CAPACITY,
    )


def build_gibbs(real, beta, capacity=None, spectrum=None):
    beta = as_beta(beta)
    if spectrum is None:
        spectrum = energy_spectrum(real, capacity)
    return gibbs_from_spectrum(real, spectrum, beta, capacity)


def pressure_realization(real, beta, capacity=None):
    """
    log Z of one realization; the disorder average lives in ``quench``.
    """
    return build_gibbs(real, beta, capacity).log_z


def thermal_expectation(g, values):
    return float(np.dot(g.probabilities(), values))


def spin_expectation(g, sites):
    """
    omega(s_i s_j ...) for a product of distinct spins.
    """
    mono = SpinMonomial.parse(sites)
    if mono.sites and mono.sites[-1] >= g.n_sites:
        raise ArgumentError("spin index out of range for N = %d" % g.n_sites)
    mask = 0
    for s in mono.sites:
        mask |= 1 << s
    idx = np.arange(1 << g.n_sites, dtype=np.int64)
    down = mono.degree() - np.bitwise_count(idx & mask).astype(np.int64)
    return thermal_expectation(g, 1 - 2 * (down & 1))


def correlation_matrix(g):
    """
    Two-point functions omega(s_k s_l) as an N x N matrix.
    """
    n = g.n_sites
    p = g.probabilities()
    size = 1 << n
    out = np.zeros((n, n))
    for start in range(0, size, BLOCK):
        idx = np.arange(start, min(size, start + BLOCK), dtype=np.int64)
        s = spin_table(n, idx).astype(np.float64)
        out += (s * p[start : start + idx.size, None]).T @ s
    out = 0.5 * (out + out.T)
    np.fill_diagonal(out, 1.0)
    return out


def walsh_hadamard(values):
    """
    Unnormalized fast Walsh-Hadamard transform of a length 2^n vector.
    """
    a = np.array(values, dtype=np.float64)
    n = a.size
    if n & (n - 1):
        raise ArgumentError("Walsh-Hadamard transform needs a power-of-two length")
    h = 1
    while h < n:
        a = a.reshape(-1, 2, h)
        x = a[:, 0, :].copy()
        a[:, 0, :] += a[:, 1, :]
        a[:, 1, :] = x - a[:, 1, :]
        a = a.reshape(n)
        h *= 2
    return a


def _xor_correlation(u, v):
    """
    A(x) = sum_s u(s) v(s ^ x).
    """
    return walsh_hadamard(walsh_hadamard(u) * walsh_hadamard(v)) / u.size


def _triple_kernel(w1, w2, w3):
    """
    T[x, y] = sum_s w1(s) w2(s ^ x) w3(s ^ y).
    """
    n = w1.size
    idx = np.arange(n)[:, None] ^ np.arange(n)[None, :]
    return w2[idx].T @ (w1[:, None] * w3[idx])


def _numerators(g):
    if "num" not in g._cache:
        g._cache["num"] = overlap_numerators(g.model, np.arange(1 << g.n_sites))
    return g._cache["num"]


def _overlap_values(g):
    return _numerators(g) / overlap_denominator(g.model)


def _weights(g, tilts, replica):
    p = g.probabilities()
    if tilts and replica in tilts:
        return p * np.asarray(tilts[replica], dtype=np.float64)
    return p


@dataclass(frozen=True, eq=False)
class OverlapHistogram:
    """
    Exact overlap law. Support points are the rationals numerator/denominator;
    for three replicas the joint law of (c12, c23, c31) is kept as well.
    """

    denominator: int
    numerators: np.ndarray
    mass: np.ndarray
    n_replicas: int = 2
    joint_numerators: np.ndarray = None
    joint_mass: np.ndarray = None

    @property
    def support(self):
        return self.numerators / self.denominator

    @property
    def joint(self):
        if self.joint_numerators is None:
            return None
        d = self.denominator
        return {
            tuple(int(k) / d for k in row): float(m)
            for row, m in zip(self.joint_numerators, self.joint_mass)
        }

    def moment(self, power=1):
        return float(np.dot(self.mass, self.support**power))

    def mean(self):
        return self.moment(1)

    def marginal(self, column):
        """
        Law of one overlap of the joint triple (0: c12, 1: c23, 2: c31).
        """
        if self.joint_numerators is None:
            raise ArgumentError("marginals need a three-replica histogram")
        return _histogram(
            self.denominator, self.joint_numerators[:, column], self.joint_mass
        )

    def to_dict(self):
        d = {
            "n_replicas": self.n_replicas,
            "denominator": int(self.denominator),
            "support": [float(v) for v in self.support],
            "mass": [float(m) for m in self.mass],
        }
        if self.joint_numerators is not None:
            d["joint"] = [
                {"c12": int(a) / self.denominator, "c23": int(b) / self.denominator,
                 "c31": int(c) / self.denominator, "mass": float(m)}
                for (a, b, c), m in zip(self.joint_numerators, self.joint_mass)
            ]
        return d


def _histogram(denominator, keys, weights, n_replicas=2):
    values, inverse = np.unique(keys, return_inverse=True)
    mass = np.maximum(np.bincount(inverse.ravel(), weights=weights.ravel()), 0.0)
    return OverlapHistogram(denominator, values, mass, n_replicas)


def _pair_law(g, tilts=None, replicas=(1, 2)):
    a, b = replicas
    key = ("pair", a if tilts and a in tilts else 0, b if tilts and b in tilts else 0)
    if tilts or key not in g._cache:
        law = _xor_correlation(_weights(g, tilts, a), _weights(g, tilts, b))
        if tilts:
            return law
        g._cache[key] = law
    return g._cache[key]


def _triple_law(g, tilts=None, replicas=(1, 2, 3)):
    if tilts or "triple" not in g._cache:
        r1, r2, r3 = replicas
        law = _triple_kernel(
            _weights(g, tilts, r1), _weights(g, tilts, r2), _weights(g, tilts, r3)
        )
        if tilts:
            return law
        g._cache["triple"] = law
    return g._cache["triple"]


def overlap_pair_distribution(g):
    if not g.model.family.gaussian():
        raise UnsupportedModelError("overlap laws need a Gaussian model")
    g.capacity.check("pair", g.n_sites)
    return _histogram(overlap_denominator(g.model), _numerators(g), _pair_law(g))


def overlap_triple_distribution(g):
    if not g.model.family.gaussian():
        raise UnsupportedModelError("overlap laws need a Gaussian model")
    g.capacity.check("triple", g.n_sites)
    num = _numerators(g)
    n = num.size
    idx = np.arange(n)[:, None] ^ np.arange(n)[None, :]
    # x = s1 ^ s2 and y = s1 ^ s3, so c23 = c(x ^ y)
    c12 = np.broadcast_to(num[:, None], (n, n))
    c31 = np.broadcast_to(num[None, :], (n, n))
    c23 = num[idx]
    keys = np.stack([c12.ravel(), c23.ravel(), c31.ravel()], axis=1)
    rows, inverse = np.unique(keys, axis=0, return_inverse=True)
    mass = np.maximum(np.bincount(inverse.ravel(), weights=_triple_law(g).ravel()), 0.0)
    marginal = _histogram(overlap_denominator(g.model), rows[:, 0], mass)
    return OverlapHistogram(
        marginal.denominator,
        marginal.numerators,
        marginal.mass,
        n_replicas=3,
        joint_numerators=rows,
        joint_mass=mass,
    )


def _feature_moments(g, weights):
    """
    First and second moments of the coupling features under ``weights``.
    """
    n = g.n_sites
    k = g.model.n_couplings()
    m1 = np.zeros(k)
    m2 = np.zeros((k, k))
    size = 1 << n
    for start in range(0, size, BLOCK):
        idx = np.arange(start, min(size, start + BLOCK), dtype=np.int64)
        phi = coupling_features(g.model, spin_table(n, idx))
        w = weights[start : start + idx.size]
        m1 += w @ phi
        m2 += (phi * w[:, None]).T @ phi
    return m1, m2


def _correlation_component(g, mono, tilts):
    """
    Contract feature moments along the replica graph of ``mono``; every
    replica must carry degree <= 2.
    """
    letters = iter("abcdefghijklmnop")
    incident = {r: [] for r in mono.replicas()}
    for (a, b), power in mono.factors:
        for _ in range(power):
            letter = next(letters)
            incident[a].append(letter)
            incident[b].append(letter)
    operands, subscripts = [], []
    for r, edges in incident.items():
        key = ("features", r if tilts and r in tilts else 0)
        if key not in g._cache or tilts:
            moments = _feature_moments(g, _weights(g, tilts, r))
            if not tilts:
                g._cache[key] = moments
        else:
            moments = g._cache[key]
        operands.append(moments[len(edges) - 1])
        subscripts.append("".join(edges))
    total = float(np.einsum(",".join(subscripts) + "->", *operands, optimize=True))
    return total / float(overlap_denominator(g.model)) ** mono.degree()


def _enumeration_component(g, mono, tilts):
    replicas = mono.replicas()
    values = _overlap_values(g)
    if len(replicas) == 2:
        g.capacity.check("pair", g.n_sites)
        law = _pair_law(g, tilts, replicas)
        return float(np.dot(law, values ** mono.degree()))
    g.capacity.check("triple", g.n_sites)
    r1, r2, r3 = replicas
    powers = dict(mono.factors)
    p12 = powers.get((r1, r2), 0)
    p13 = powers.get((r1, r3), 0)
    p23 = powers.get((r2, r3), 0)
    law = _triple_law(g, tilts, replicas)
    n = values.size
    idx = np.arange(n)[:, None] ^ np.arange(n)[None, :]
    term = (values**p12)[:, None] * (values**p13)[None, :] * values[idx] ** p23
    return float(np.sum(law * term))


def _can_correlate(g, mono):
    return all(mono.replica_degree(r) <= 2 for r in mono.replicas())


def overlap_moment_exact(g, monomial, method="auto", tilts=None):
    """
    E over independent replicas from ``g`` of an overlap monomial.

    ``tilts`` optionally maps a replica label to a configuration function
    multiplying that replica's weight, giving omega(f * g(s^a)).
    ``method`` selects the correlation-sum path, the pair/triple enumeration
    path, or (``auto``) the cheapest path able to evaluate the monomial.
    """
    mono = OverlapMonomial.parse(monomial)
    if mono.degree() > 4:
        raise ArgumentError("overlap monomials are limited to total degree 4")
    if method not in ("auto", "correlation", "enumeration"):
        raise ArgumentError("unknown moment method %r" % method)
    if mono != ONE and not g.model.family.gaussian():
        raise UnsupportedModelError("overlap moments need a Gaussian model")

    result = 1.0
    for comp in mono.components():
        if comp.arity() > 3:
            raise ArgumentError("connected overlap monomials span at most 3 replicas")
        path = method
        if path == "auto":
            fits_enumeration = g.n_sites <= (
                g.capacity.max_pair_sites if comp.arity() == 2 else g.capacity.max_triple_sites
            )
            path = "enumeration" if fits_enumeration or not _can_correlate(g, comp) else "correlation"
        if path == "correlation":
            if not _can_correlate(g, comp):
                raise ArgumentError(
                    "correlation sums need replica degree <= 2, got %s" % comp
                )
            result *= _correlation_component(g, comp, tilts)
        else:
            result *= _enumeration_component(g, comp, tilts)

    # tilted replicas that carry no overlap contribute their own expectation
    for r, tilt in (tilts or {}).items():
        if r not in mono.replicas():
            result *= thermal_expectation(g, tilt)
    return result


def overlap_moment_bruteforce(g, monomial):
    """
    Direct sum over all replica tuples; an oracle for N <= 8.
    """
    mono = OverlapMonomial.parse(monomial).canonical()
    if g.n_sites > 8:
        raise CapacityError("bruteforce", g.n_sites, 8)
    arity = mono.arity()
    if arity == 0:
        return 1.0
    if arity > 3:
        raise ArgumentError("bruteforce enumeration handles at most 3 replicas")
    p = g.probabilities()
    n = p.size
    den = overlap_denominator(g.model)
    powers = dict(mono.factors)
    total = []
    for s1 in range(n):
        if arity == 2:
            s2 = np.arange(n)
            c12 = overlap_numerators(g.model, s1 ^ s2) / den
            total.append(p[s1] * np.dot(p, c12 ** powers.get((1, 2), 0)))
            continue
        s2 = np.arange(n)[:, None]
        s3 = np.arange(n)[None, :]
        c12 = overlap_numerators(g.model, np.broadcast_to(s1 ^ s2, (n, n))) / den
        c13 = overlap_numerators(g.model, np.broadcast_to(s1 ^ s3, (n, n))) / den
        c23 = overlap_numerators(g.model, s2 ^ s3) / den
        term = c12 ** powers.get((1, 2), 0) * c13 ** powers.get((1, 3), 0) * c23 ** powers.get((2, 3), 0)
        total.append(p[s1] * float(np.sum(p[:, None] * p[None, :] * term)))
    return math.fsum(total)


def cw_observable(n_sites, beta, monomial):
    """
    omega(s_1 ... s_k) for the Curie-Weiss model in zero field, k <= 4,
    summing over the total magnetization with binomial multiplicities.
    """
    if isinstance(monomial, int):
        degree = monomial
    else:
        degree = SpinMonomial.parse(monomial).degree()
    n = int(n_sites)
    if degree > 4:
        raise ArgumentError("Curie-Weiss observables are limited to degree 4")
    if degree > n:
        raise ArgumentError("a product of %d distinct spins needs N >= %d" % (degree, degree))
    if degree == 0:
        return 1.0
    beta = float(beta)
    # spin-flip symmetry; at beta = 0 the spins are independent
    if degree % 2 == 1 or beta == 0.0:
        return 0.0
    k = np.arange(n + 1, dtype=np.float64)
    M = 2.0 * k - n
    logw = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1) + beta * M * M / (2.0 * n)
    w = np.exp(logw - logsumexp(logw))
    EM = [float(np.dot(w, M**j)) for j in range(5)]

    s2 = (EM[2] - n) / (n * (n - 1.0))
    if degree == 2:
        return s2
    f3 = n * (n - 1.0) * (n - 2.0)
    f4 = f3 * (n - 3.0)
    rest = n + 3.0 * n * (n - 1.0) + (4.0 * n * (n - 1.0) + 6.0 * f3) * s2
    return (EM[4] - rest) / f4
