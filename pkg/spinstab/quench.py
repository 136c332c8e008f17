# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Disorder averages.

A ``Quench`` evaluates an observable on S independent realizations seeded by
``(master_seed, s)``, gathers the per-realization values in sample-index
order and reduces them with an exactly rounded sum, so the result does not
depend on the number of worker threads.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, SamplingError, UnsupportedModelError
from .exact import (
    DEFAULT_CAPACITY,
    Capacity,
    as_beta,
    energy_spectrum,
    gibbs_from_spectrum,
    overlap_moment_exact,
    overlap_triple_distribution,
    thermal_expectation,
)
from .logging import debug, progress, warning
from .model import ModelSpec, overlap_denominator, sample_couplings
from .montecarlo import SamplerConfig, diagnostics, run_sampler
from .monomial import ONE, OverlapMonomial
from .rng import PERTURBATION, SeedLabel
from .util import Timer, cpu_count, fsum

__all__ = [
    "QuenchedEstimate",
    "Realization",
    "ExactEngine",
    "MonteCarloEngine",
    "Quench",
    "RejectedRun",
    "quenched_average",
    "quenched_pressure",
    "annealed_pressure",
    "RESERVED_TAIL",
]

RESERVED_TAIL = 2**40
MAX_REPLACEMENTS = 8
DEFAULT_SAMPLES = {"exact": 500, "mc": 100}


class RejectedRun(SamplingError):
    """
    A Monte Carlo run failed its diagnostics and must be replaced.
    """


@dataclass(frozen=True)
class QuenchedEstimate:
    mean: float
    stderr: float
    n_samples: int
    per_sample: tuple = None
    extra: dict = None

    @classmethod
    def from_samples(cls, values, keep=False, extra=None):
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.size == 0:
            raise ArgumentError("no disorder samples to average")
        kept = tuple(float(v) for v in values) if keep else None
        if np.all(values == values[0]):
            return cls(float(values[0]), 0.0, int(values.size), kept, extra)
        mean = fsum(values) / values.size
        stderr = float(np.std(values, ddof=1) / math.sqrt(values.size))
        return cls(mean, stderr, int(values.size), kept, extra)

    @classmethod
    def exact(cls, value, n_samples=1, extra=None):
        return cls(float(value), 0.0, n_samples, None, extra)

    def to_dict(self):
        d = {"mean": self.mean, "stderr": self.stderr, "n_samples": self.n_samples}
        if self.per_sample is not None:
            d["per_sample"] = list(self.per_sample)
        if self.extra:
            d.update(self.extra)
        return d


class Realization(object):
    """
    Per-realization context handed to observables. Couplings, spectra,
    ensembles and sample sets are built lazily and cached.
    """

    def __init__(self, quench, index, label):
        self.quench = quench
        self.index = index
        self.label = label
        self._cache = {}

    def cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def model(self):
        return self.quench.model()

    @property
    def coupling(self):
        return self.cached("coupling", lambda: self.quench.draw(self.model, self.label))

    def perturbation(self):
        """
        An independent, identically distributed Hamiltonian for this index.
        """
        return self.cached(
            "perturbation", lambda: sample_couplings(self.model, self.label, PERTURBATION)
        )

    def spectrum(self):
        return self.cached(
            "spectrum", lambda: energy_spectrum(self.coupling, self.quench.capacity())
        )

    def ensemble(self, beta):
        """
        Exact Gibbs measure at any finite ``beta``; shifted inverse
        temperatures below zero are allowed for deformed states.
        """
        beta = float(beta)
        return self.cached(
            ("gibbs", beta),
            lambda: gibbs_from_spectrum(
                self.coupling, self.spectrum(), beta, self.quench.capacity()
            ),
        )

    def moment(self, monomial, beta, tilts=None):
        return self.quench.source().moment(self, monomial, beta, tilts)

    def triples(self, beta):
        return self.quench.source().triples(self, beta)

    def energy_moments(self, beta):
        return self.quench.source().energy_moments(self, beta)


class ExactEngine(object):
    name = "exact"

    def __init__(self, capacity=None, method="auto"):
        self.capacity = capacity or DEFAULT_CAPACITY
        self.method = method

    def check(self, model):
        self.capacity.check("ensemble", model.n_sites)

    def moment(self, real, monomial, beta, tilts=None):
        return overlap_moment_exact(real.ensemble(beta), monomial, self.method, tilts)

    def triples(self, real, beta):
        hist = overlap_triple_distribution(real.ensemble(beta))
        return hist.joint_numerators / hist.denominator, hist.joint_mass

    def energy_moments(self, real, beta):
        g = real.ensemble(beta)
        return thermal_expectation(g, g.energies), thermal_expectation(g, g.energies**2)


class MonteCarloEngine(object):
    """
    Thermal averages from parallel-tempering runs, one run per realization
    and inverse temperature. Runs failing their diagnostics raise
    ``RejectedRun`` so that the quench replaces the realization.
    """

    name = "mc"

    def __init__(self, **settings):
        self.settings = settings

    def get(self, key, default=None):
        return self.settings.get(key, default)

    def check(self, model):
        if not model.family.gaussian():
            raise UnsupportedModelError("the Monte Carlo engine samples SK and EA models")

    def sampler_config(self, real, beta):
        return SamplerConfig.for_target(
            beta,
            n_rungs=self.get("n_rungs", 8),
            beta_min=self.get("beta_min", 0.2),
            n_clones=self.get("n_clones", 4),
            sweeps_burnin=self.get("sweeps_burnin", 1000),
            sweeps_measure=self.get("sweeps_measure", 4096),
            exchange_period=self.get("exchange_period", 1),
            n_batches=self.get("n_batches", 16),
            tune_ladder=self.get("tune_ladder", True),
            seed_label=real.label,
        )

    def samples(self, real, beta):
        def run():
            s = run_sampler(real.coupling, self.sampler_config(real, beta))
            if self.get("check_diagnostics", True) and not diagnostics(s).accepted:
                raise RejectedRun("diagnostics rejected sample %d" % real.index)
            return s

        return real.cached(("samples", float(beta)), run)

    def moment(self, real, monomial, beta, tilts=None):
        if tilts:
            raise ArgumentError("tilted replica moments need the exact engine")
        return self.samples(real, beta).moment(monomial)[0]

    def triples(self, real, beta):
        return self.samples(real, beta).triples()

    def energy_moments(self, real, beta):
        e = self.samples(real, beta).energies.ravel()
        return float(np.mean(e)), float(np.mean(e * e))


class Quench(object):
    def __init__(self, **kwargs):
        self.config = kwargs
        # Option to inject a custom replica statistics source for testing purposes
        self._source = kwargs.get("source")
        self.replaced = []
        self.timings = []

    def get(self, key, default=None):
        return self.config.get(key, default)

    def model(self):
        model = self.get("model")
        if not isinstance(model, ModelSpec):
            raise ArgumentError("a quench needs a ModelSpec, got %r" % (model,))
        return model

    def master_seed(self):
        seed = self.get("master_seed")
        if seed is None:
            raise ArgumentError("master_seed is required")
        return int(seed)

    def engine(self):
        return self.get("engine", "exact")

    def n_samples(self):
        n = self.get("n_samples")
        if n is None:
            n = DEFAULT_SAMPLES.get(self.engine(), 100)
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ArgumentError("n_samples must be a positive integer, got %r" % (n,))
        return int(n)

    def first_index(self):
        return int(self.get("first_index", 0))

    def workers(self):
        w = self.get("workers", 1)
        if w == 0:
            return cpu_count()
        return max(1, int(w))

    def capacity(self):
        return self.get("capacity") or DEFAULT_CAPACITY

    def draw(self, model, label):
        # Option to inject a custom coupling factory for testing purposes
        factory = self.get("couplings", sample_couplings)
        return factory(model, label)

    def source(self):
        if self._source is None:
            if self.engine() == "exact":
                self._source = ExactEngine(self.capacity(), self.get("method", "auto"))
            elif self.engine() == "mc":
                self._source = MonteCarloEngine(**(self.get("sampler") or {}))
            else:
                raise ArgumentError("unknown engine %r" % self.engine())
        return self._source

    def check(self):
        """
        Fail early when the engine cannot handle the model.
        """
        check = getattr(self.source(), "check", None)
        if check is not None:
            check(self.model())

    def _evaluate(self, fn, index):
        timer = Timer()
        seed = self.master_seed()
        label = SeedLabel(seed, index)
        replaced = []
        for attempt in range(MAX_REPLACEMENTS + 1):
            try:
                value = fn(Realization(self, index, label))
                return np.asarray(value, dtype=np.float64), replaced, timer.elapsed()
            except RejectedRun:
                label = SeedLabel(seed, RESERVED_TAIL + index * MAX_REPLACEMENTS + attempt)
                replaced.append(label.sample_index)
        raise SamplingError(
            "sample %d rejected %d times in a row" % (index, MAX_REPLACEMENTS + 1)
        )

    def map(self, fn):
        """
        Evaluate ``fn(realization)`` on every sample; rows are returned in
        sample-index order whatever the scheduling.
        """
        from multiprocessing.dummy import Pool as ThreadPool

        self.check()
        indices = range(self.first_index(), self.first_index() + self.n_samples())
        debug(
            "quench %s N=%d: %d samples on %d workers",
            self.model().family.value,
            self.model().n_sites,
            len(indices),
            self.workers(),
        )
        pool = ThreadPool(self.workers())
        results = []
        for result in pool.imap(lambda i: self._evaluate(fn, i), indices):
            results.append(result)
            progress("disorder samples", len(results), len(indices))
        pool.close()
        pool.join()

        for index, (_, replaced, elapsed) in zip(indices, results):
            self.timings.append(elapsed)
            if replaced:
                warning(
                    "sample %d replaced by reserved index %d after failed diagnostics",
                    index,
                    replaced[-1],
                )
                self.replaced.append({"index": index, "replacements": replaced})
        return np.stack([r[0] for r in results])

    def average(self, fn, keep=False):
        return QuenchedEstimate.from_samples(self.map(fn), keep=keep)

    def provenance(self, **extra):
        record = {
            "model": self.model().to_dict(),
            "master_seed": self.master_seed(),
            "engine": getattr(self.source(), "name", "custom"),
            "n_samples": self.n_samples(),
            "first_index": self.first_index(),
            "replaced": list(self.replaced),
        }
        record.update(extra)
        return record

    def timing(self):
        return {
            "n_samples": len(self.timings),
            "total_seconds": fsum(self.timings),
            "max_seconds": max(self.timings) if self.timings else 0.0,
        }


def _observable(observable, beta):
    if callable(observable):
        return lambda real: observable(real, beta)
    name = str(observable).strip()
    if name in ("one", "1"):
        return lambda real: 1.0
    if name == "pressure":
        return lambda real: real.ensemble(beta).log_z
    if name == "energy":
        return lambda real: real.energy_moments(beta)[0]
    mono = OverlapMonomial.parse(name)
    if mono == ONE:
        return lambda real: 1.0
    return lambda real: real.moment(mono, beta)


def quenched_average(model, beta, observable, n_samples=None, master_seed=None, engine="exact", **kwargs):
    """
    Av of a thermal observable: a callable ``f(realization, beta)``, or one
    of ``"one"``, ``"pressure"``, ``"energy"`` or an overlap monomial such as
    ``"c12*c23"``.
    """
    beta = as_beta(beta)
    quench = Quench(
        model=model, n_samples=n_samples, master_seed=master_seed, engine=engine, **kwargs
    )
    return quench.average(_observable(observable, beta), keep=kwargs.get("keep", False))


def annealed_pressure(model, beta):
    """
    log Av Z = N log 2 + beta^2 Av(H^2) / 2 for the Gaussian models.
    """
    if not model.family.gaussian():
        raise UnsupportedModelError("the annealed pressure needs a Gaussian model")
    self_overlap = model.n_couplings() / overlap_denominator(model)
    return model.n_sites * math.log(2.0) + 0.5 * beta * beta * model.n_sites * self_overlap


def quenched_pressure(model, beta, n_samples=None, master_seed=None, workers=1, capacity=None, **kwargs):
    """
    Av log Z by exact enumeration. For the Gaussian models the estimate
    carries the annealed bound and whether the quenched mean respects it.
    """
    beta = as_beta(beta)
    quench = Quench(
        model=model,
        n_samples=n_samples,
        master_seed=master_seed,
        engine="exact",
        workers=workers,
        capacity=capacity if isinstance(capacity, Capacity) else None,
        **kwargs
    )
    est = quench.average(lambda real: real.ensemble(beta).log_z)
    if not model.family.gaussian():
        return est
    bound = annealed_pressure(model, beta)
    ok = est.mean <= bound + 3.0 * est.stderr + 1e-12 * abs(bound)
    if not ok:
        warning("quenched pressure %.6g exceeds the annealed bound %.6g", est.mean, bound)
    return QuenchedEstimate(
        est.mean,
        est.stderr,
        est.n_samples,
        est.per_sample,
        {"annealed": bound, "annealed_bound_ok": bool(ok)},
    )
