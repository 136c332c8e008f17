# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Metropolis sampling with parallel tempering.

Every tempering rung carries R clones with identical couplings. The state is
a (rungs, clones, N) array of +1/-1 spins together with the local fields
F = W s, so that flipping site i costs dH = -2 s_i F_i. Overlaps between
distinct clones are measured after every sweep at the largest (target) beta.
"""

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.stats import ks_2samp

from .errors import ArgumentError, SamplingError, UnsupportedModelError
from .logging import debug
from .model import (
    Family,
    checkerboard,
    interaction_matrix,
    lattice_edges,
    overlap_denominator,
)
from .monomial import ONE, OverlapMonomial
from .rng import SAMPLER, SeedLabel, stream
from .stats import batch_means, integrated_autocorrelation_time

__all__ = [
    "SamplerConfig",
    "OverlapSampleSet",
    "SamplerDiagnostics",
    "geometric_ladder",
    "run_sampler",
    "thermal_moment_mc",
    "diagnostics",
    "MIN_BATCHES",
]

MAX_RECORDED_SITES = 62
MIN_BATCHES = 16


def geometric_ladder(beta_target, n_rungs=8, beta_min=0.2):
    """
    Geometric inverse temperatures from ``beta_min`` up to ``beta_target``;
    a single rung when the target is already hot.
    """
    beta_target = float(beta_target)
    if beta_target <= beta_min or n_rungs <= 1:
        return (beta_target,)
    return tuple(float(b) for b in np.geomspace(beta_min, beta_target, n_rungs))


@dataclass(frozen=True)
class SamplerConfig:
    beta_ladder: tuple
    n_clones: int = 4
    sweeps_burnin: int = 1000
    sweeps_measure: int = 4096
    exchange_period: int = 1
    seed_label: SeedLabel = SeedLabel(0, 0)
    n_batches: int = 16
    tune_ladder: bool = True
    target_acceptance: float = 0.8
    record_configurations: bool = False

    def __post_init__(self):
        ladder = tuple(float(b) for b in np.atleast_1d(self.beta_ladder))
        object.__setattr__(self, "beta_ladder", ladder)
        if not isinstance(self.seed_label, SeedLabel):
            object.__setattr__(self, "seed_label", SeedLabel(*self.seed_label))
        if not ladder:
            raise SamplingError("degenerate ladder: no rungs")
        if any(not math.isfinite(b) or b < 0 for b in ladder):
            raise ArgumentError("ladder rungs must be finite and >= 0")
        if any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise SamplingError("degenerate ladder: rungs must be strictly increasing")
        if self.n_clones < 3:
            raise ArgumentError("at least 3 clones are needed, got %d" % self.n_clones)
        if self.sweeps_burnin < 0 or self.sweeps_measure < 1:
            raise ArgumentError("sweep counts must be positive")
        if self.exchange_period < 1:
            raise ArgumentError("exchange_period must be >= 1, got %d" % self.exchange_period)
        if self.n_batches < MIN_BATCHES:
            raise ArgumentError("batch-means errors need at least %d batches, got %d" % (MIN_BATCHES, self.n_batches))

    @classmethod
    def for_target(cls, beta, n_rungs=8, beta_min=0.2, **kwargs):
        return cls(geometric_ladder(beta, n_rungs, beta_min), **kwargs)

    @property
    def beta_target(self):
        return self.beta_ladder[-1]


@dataclass(frozen=True, eq=False)
class OverlapSampleSet:
    """
    Overlap time series between distinct clones at the target beta.

    ``samples`` has one row per measurement and one column per clone pair
    (1,2), (1,3), ..., (R-1,R).
    """

    n_sites: int
    n_clones: int
    samples: np.ndarray = field(repr=False)
    sweeps: np.ndarray = field(default=None, repr=False)
    energies: np.ndarray = field(default=None, repr=False)
    beta_ladder: tuple = ()
    swap_acceptance: tuple = ()
    configurations: np.ndarray = field(default=None, repr=False)
    n_batches: int = 16

    def __post_init__(self):
        arr = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if arr.shape[1] != len(self.pairs):
            raise ArgumentError(
                "%d clones give %d pairs, samples have %d columns"
                % (self.n_clones, len(self.pairs), arr.shape[1])
            )
        object.__setattr__(self, "samples", arr)
        if self.sweeps is None:
            object.__setattr__(self, "sweeps", np.arange(arr.shape[0]))

    @classmethod
    def from_samples(cls, samples, n_clones, n_sites=0, **kwargs):
        return cls(n_sites, n_clones, samples, **kwargs)

    @property
    def pairs(self):
        return [(a + 1, b + 1) for a, b in zip(*np.triu_indices(self.n_clones, 1))]

    def __len__(self):
        return self.samples.shape[0]

    def column(self, a, b):
        a, b = min(a, b), max(a, b)
        return self.samples[:, self.pairs.index((a, b))]

    def series(self, monomial):
        """
        Per-measurement value of an overlap monomial, averaged over every
        assignment of its replicas to distinct clones.
        """
        mono = OverlapMonomial.parse(monomial)
        if mono == ONE:
            return np.ones(len(self))
        replicas = mono.replicas()
        if len(replicas) > self.n_clones:
            raise ArgumentError(
                "%s needs %d replicas, only %d clones sampled"
                % (mono, len(replicas), self.n_clones)
            )
        total = np.zeros(len(self))
        count = 0
        for clones in itertools.permutations(range(1, self.n_clones + 1), len(replicas)):
            mapping = dict(zip(replicas, clones))
            term = np.ones(len(self))
            for (a, b), power in mono.factors:
                term = term * self.column(mapping[a], mapping[b]) ** power
            total += term
            count += 1
        return total / count

    def moment(self, monomial):
        return batch_means(self.series(monomial), self.n_batches)

    def tau_int(self):
        return integrated_autocorrelation_time(self.column(1, 2))

    def batch_stderr(self):
        return [batch_means(self.samples[:, k], self.n_batches)[1] for k in range(len(self.pairs))]

    def triples(self):
        """
        Every clone triple at every measurement as (c12, c23, c31) rows with
        uniform weights.
        """
        rows = []
        for a, b, c in itertools.combinations(range(1, self.n_clones + 1), 3):
            rows.append(np.stack([self.column(a, b), self.column(b, c), self.column(a, c)], axis=1))
        points = np.concatenate(rows)
        return points, np.full(points.shape[0], 1.0 / points.shape[0])

    def spill(self, path):
        from .scratch import write_scratch

        write_scratch(path, self)


@dataclass(frozen=True)
class SamplerDiagnostics:
    tau_int: float
    swap_acceptance: tuple
    clone_means: tuple
    clone_stderr: tuple
    clone_ks_pvalues: tuple
    accepted: bool

    def to_dict(self):
        return {
            "tau_int": self.tau_int,
            "swap_acceptance": list(self.swap_acceptance),
            "clone_means": list(self.clone_means),
            "clone_stderr": list(self.clone_stderr),
            "clone_ks_pvalues": list(self.clone_ks_pvalues),
            "accepted": self.accepted,
        }


def _rows(W):
    """
    Per-site (columns, values) of the interaction matrix.
    """
    if sparse.issparse(W):
        W = W.tocsr()
        return [
            (W.indices[W.indptr[i] : W.indptr[i + 1]], W.data[W.indptr[i] : W.indptr[i + 1]])
            for i in range(W.shape[0])
        ]
    return [(slice(None), W[i]) for i in range(W.shape[0])]


def _fields(W, spins):
    flat = spins.reshape(-1, spins.shape[-1])
    if sparse.issparse(W):
        out = (W @ flat.T).T
    else:
        out = flat @ W
    return np.asarray(out).reshape(spins.shape)


class _Chain:
    """
    Mutable tempering state; private to ``run_sampler``.
    """

    def __init__(self, real, cfg):
        self.model = real.model
        self.W, self.const = interaction_matrix(real)
        self.rows = _rows(self.W)
        self.colours = checkerboard(self.model)
        self.betas = np.array(cfg.beta_ladder)
        self.rng = stream(cfg.seed_label, SAMPLER)
        shape = (len(self.betas), cfg.n_clones, self.model.n_sites)
        self.spins = 2.0 * self.rng.integers(0, 2, size=shape) - 1.0
        self.fields = _fields(self.W, self.spins)
        self.accepted = np.zeros(max(len(self.betas) - 1, 0))
        self.attempted = np.zeros_like(self.accepted)
        self.n_exchanges = 0

    def energies(self):
        return self.const + 0.5 * np.sum(self.spins * self.fields, axis=-1)

    def sweep(self):
        hot = self.betas == 0.0
        if hot.any():
            # every flip is accepted at beta = 0, so those rungs redraw uniform spins
            self.spins[hot] = 2.0 * self.rng.integers(0, 2, size=self.spins[hot].shape) - 1.0
            self.fields = _fields(self.W, self.spins)
        logu = np.log1p(-self.rng.random(self.spins.shape))
        beta = self.betas[:, None]
        if self.colours is None:
            for i, (cols, vals) in enumerate(self.rows):
                s = self.spins[..., i]
                flip = logu[..., i] < beta * 2.0 * s * self.fields[..., i]
                ds = np.where(flip, -2.0 * s, 0.0)
                self.spins[..., i] += ds
                self.fields[..., cols] += ds[..., None] * vals
            return
        for colour in (0, 1):
            mask = self.colours == colour
            s = self.spins[..., mask]
            flip = logu[..., mask] < beta[..., None] * 2.0 * s * self.fields[..., mask]
            ds = np.zeros_like(self.spins)
            ds[..., mask] = np.where(flip, -2.0 * s, 0.0)
            self.spins += ds
            self.fields += _fields(self.W, ds)

    def exchange(self):
        parity = self.n_exchanges % 2
        self.n_exchanges += 1
        if len(self.betas) < 2:
            return
        e = self.energies()
        for k in range(parity, len(self.betas) - 1, 2):
            d = (self.betas[k + 1] - self.betas[k]) * (e[k + 1] - e[k])
            swap = np.log1p(-self.rng.random(d.shape)) < d
            self.attempted[k] += d.size
            self.accepted[k] += np.count_nonzero(swap)
            if swap.any():
                for arr in (self.spins, self.fields, e):
                    tmp = arr[k, swap].copy()
                    arr[k, swap] = arr[k + 1, swap]
                    arr[k + 1, swap] = tmp

    def acceptance(self):
        return np.divide(
            self.accepted, self.attempted, out=np.zeros_like(self.accepted), where=self.attempted > 0
        )

    def reset_counters(self):
        self.accepted[:] = 0
        self.attempted[:] = 0

    def tune(self, target):
        """
        Stretch log-spaced gaps with high swap acceptance and shrink the
        others, keeping both ends of the ladder fixed.
        """
        if len(self.betas) < 3 or self.betas[0] <= 0:
            return
        logb = np.log(self.betas)
        gaps = np.diff(logb)
        ratio = np.clip((self.acceptance() + 0.05) / (target + 0.05), 0.5, 2.0)
        gaps = gaps * ratio
        gaps *= (logb[-1] - logb[0]) / gaps.sum()
        self.betas = np.exp(logb[0] + np.concatenate([[0.0], np.cumsum(gaps)]))
        self.betas[-1] = math.exp(logb[-1])
        debug("tuned ladder to %s", np.array2string(self.betas, precision=4))
        self.reset_counters()

    def measure(self):
        s = self.spins[-1]
        if self.model.family is Family.SK:
            gram = s @ s.T
            gram = gram * gram
        else:
            edges = lattice_edges(self.model)
            prod = s[:, edges[:, 0]] * s[:, edges[:, 1]]
            gram = prod @ prod.T
        iu = np.triu_indices(s.shape[0], 1)
        return gram[iu] / overlap_denominator(self.model)

    def packed(self):
        bits = (self.spins[-1] > 0).astype(np.int64)
        return bits @ (np.int64(1) << np.arange(self.model.n_sites, dtype=np.int64))


def run_sampler(real, cfg):
    """
    Run burn-in and measurement sweeps for one realization.
    """
    if not real.model.family.gaussian():
        raise UnsupportedModelError("the Monte Carlo engine samples SK and EA models")
    if cfg.record_configurations and real.model.n_sites > MAX_RECORDED_SITES:
        raise ArgumentError("configurations can be recorded for N <= %d" % MAX_RECORDED_SITES)

    chain = _Chain(real, cfg)
    tune_every = max(20, cfg.sweeps_burnin // 10)
    for t in range(cfg.sweeps_burnin):
        chain.sweep()
        if (t + 1) % cfg.exchange_period == 0:
            chain.exchange()
        if cfg.tune_ladder and (t + 1) % tune_every == 0 and t + 1 < cfg.sweeps_burnin:
            chain.tune(cfg.target_acceptance)
    chain.reset_counters()

    n_pairs = cfg.n_clones * (cfg.n_clones - 1) // 2
    samples = np.empty((cfg.sweeps_measure, n_pairs))
    target_energies = np.empty((cfg.sweeps_measure, cfg.n_clones))
    configs = None
    if cfg.record_configurations:
        configs = np.empty((cfg.sweeps_measure, cfg.n_clones), dtype=np.int64)
    for t in range(cfg.sweeps_measure):
        chain.sweep()
        if (t + 1) % cfg.exchange_period == 0:
            chain.exchange()
        samples[t] = chain.measure()
        target_energies[t] = chain.energies()[-1]
        if configs is not None:
            configs[t] = chain.packed()

    debug(
        "sampler %s: %d sweeps, swap acceptance %s",
        cfg.seed_label.as_list(),
        cfg.sweeps_burnin + cfg.sweeps_measure,
        np.array2string(chain.acceptance(), precision=3),
    )
    return OverlapSampleSet(
        n_sites=real.model.n_sites,
        n_clones=cfg.n_clones,
        samples=samples,
        sweeps=np.arange(cfg.sweeps_burnin, cfg.sweeps_burnin + cfg.sweeps_measure),
        energies=target_energies,
        beta_ladder=tuple(float(b) for b in chain.betas),
        swap_acceptance=tuple(float(a) for a in chain.acceptance()),
        configurations=configs,
        n_batches=cfg.n_batches,
    )


def thermal_moment_mc(real, cfg, monomial, samples=None):
    """
    Batch-means estimate and standard error of an overlap monomial.
    ``samples`` reuses an earlier run for the same realization.
    """
    mono = OverlapMonomial.parse(monomial)
    if mono == ONE:
        return 1.0, 0.0
    if mono.arity() > cfg.n_clones:
        raise ArgumentError("%s needs more replicas than the %d clones" % (mono, cfg.n_clones))
    if cfg.sweeps_measure < cfg.n_batches:
        raise SamplingError(
            "%d measurements are not enough for %d batches" % (cfg.sweeps_measure, cfg.n_batches)
        )
    if samples is None:
        samples = run_sampler(real, cfg)
    return samples.moment(mono)


def diagnostics(s, alpha=0.01):
    """
    Autocorrelation time, swap acceptance and clone-exchangeability checks.
    The run is accepted when c12, c13 and c23 agree pairwise both in mean
    (within 3 standard errors) and in law (Kolmogorov-Smirnov p > alpha).
    """
    if len(s) == 0:
        raise ArgumentError("diagnostics need a non-empty sample set")
    cols = [s.column(1, 2), s.column(1, 3), s.column(2, 3)]
    tau = integrated_autocorrelation_time(cols[0])
    enough = len(s) >= s.n_batches

    means, errs = [], []
    for c in cols:
        m, e = batch_means(c, s.n_batches) if enough else (float(np.mean(c)), 0.0)
        means.append(m)
        errs.append(e)

    thin = max(1, int(math.ceil(2.0 * tau)))
    pvalues = []
    accepted = True
    for i, j in ((0, 1), (0, 2), (1, 2)):
        diff = cols[i] - cols[j]
        m, e = batch_means(diff, s.n_batches) if enough else (float(np.mean(diff)), 0.0)
        if abs(m) > 3.0 * e + 1e-12:
            accepted = False
        a, b = cols[i][::thin], cols[j][::thin]
        p = 1.0 if np.array_equal(np.sort(a), np.sort(b)) else float(ks_2samp(a, b).pvalue)
        pvalues.append(p)
        if p <= alpha:
            accepted = False

    return SamplerDiagnostics(
        tau_int=float(tau),
        swap_acceptance=tuple(s.swap_acceptance),
        clone_means=tuple(means),
        clone_stderr=tuple(errs),
        clone_ks_pvalues=tuple(pvalues),
        accepted=accepted,
    )
