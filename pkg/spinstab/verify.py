# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Built-in smoke suite: covariance of the Gaussian Hamiltonians, closed forms
at infinite temperature, the classical temperature-shift identity and one
small Ghirlanda-Guerra scan.
"""

import math

import numpy as np

from . import model as _model
from .exact import build_gibbs, overlap_moment_exact
from .identities import EXACTNESS, classical_shift_check, residual_scan
from .logging import colors, header, set_verbose
from .model import ModelSpec, SpinConfiguration, sample_couplings
from .quench import quenched_pressure
from .report import report_document, summary_table, write_report
from .rng import PAIRS, SeedLabel, stream
from .runner import exit_status, log_outcome
from .util import fullpath

__all__ = ["SmokeSuite", "VERIFY_SEED"]

VERIFY_SEED = 20240917


def _check(name, passed, **values):
    d = {"kind": "check", "identity": name, "tier": EXACTNESS, "passed": bool(passed)}
    d.update(values)
    return d


class SmokeSuite(object):
    def __init__(self, **kwargs):
        self.config = kwargs
        if kwargs.get("verbose"):
            set_verbose()
        if "no_colour" in kwargs:
            if kwargs["no_colour"]:
                colors.disable()
            else:
                colors.enable()

    def get(self, key, default=None):
        value = self.config.get(key)
        return default if value is None else value

    def quick(self):
        return bool(self.get("quick", False))

    def workers(self):
        return int(self.get("workers", 1))

    def covariance(self):
        """
        Av(H(a) H(b)) from the coupling layout against N c(a, b) on random
        configuration pairs.
        """
        n_pairs = 20 if self.quick() else 100
        models = [ModelSpec.sk(n) for n in (4, 8, 16)]
        models += [ModelSpec.ea(2, 2), ModelSpec.ea(3, 2), ModelSpec.ea(2, 4)]
        worst = 0.0
        for k, m in enumerate(models):
            rng = stream(SeedLabel(VERIFY_SEED, k), PAIRS)
            bits = rng.integers(0, 2, size=(n_pairs, 2, m.n_sites))
            for a, b in bits:
                analytic, target = _model.verify_covariance(
                    m, SpinConfiguration.from_spins(2 * a - 1), SpinConfiguration.from_spins(2 * b - 1)
                )
                worst = max(worst, abs(analytic - target) / max(abs(target), 1.0))
        return _check("covariance", worst < 1e-12, max_relative_error=worst, n_pairs=n_pairs * len(models))

    def infinite_temperature(self):
        n = 8
        est = quenched_pressure(ModelSpec.sk(n), 0.0, n_samples=4, master_seed=VERIFY_SEED, workers=self.workers())
        pressure_error = abs(est.mean - n * math.log(2.0)) / (n * math.log(2.0))
        g = build_gibbs(sample_couplings(ModelSpec.sk(n), SeedLabel(VERIFY_SEED, 0)), 0.0)
        c12 = overlap_moment_exact(g, "c12")
        passed = pressure_error < 1e-12 and est.stderr == 0.0 and abs(c12 - 1.0 / n) < 1e-12
        return _check(
            "infinite_temperature",
            passed,
            pressure=est.mean,
            pressure_relative_error=pressure_error,
            c12=c12,
        )

    def classical_shift(self):
        out = []
        betas = (0.5, 1.0) if self.quick() else (0.5, 1.0, 2.0)
        for family in (ModelSpec.cw(8), ModelSpec.sk(8)):
            for beta in betas:
                for lam in (0.1, 1.0):
                    out.append(classical_shift_check(family, 8, lam, beta, "s0*s1", seed=VERIFY_SEED))
        worst = max(abs(r.residual) for r in out)
        return _check("classical_shift_check", all(r.passed for r in out), max_residual=worst, n_checks=len(out))

    def gg_scan(self):
        scan = residual_scan(
            "gg_residual",
            ModelSpec.sk(4),
            [4, 5, 6],
            n_replicas=2,
            f="c12",
            beta=1.0,
            n_samples=10 if self.quick() else 40,
            seed=VERIFY_SEED,
            workers=self.workers(),
        )
        return scan.to_dict()

    def run(self):
        header("Running smoke suite%s", " (quick)" if self.quick() else "")
        reports = [self.covariance(), self.infinite_temperature(), self.classical_shift(), self.gg_scan()]
        for d in reports:
            log_outcome(d)
        print(summary_table(reports))
        if self.get("output"):
            document = report_document(
                {"suite": "verify", "quick": self.quick()},
                reports,
                {"master_seed": VERIFY_SEED, "numpy": np.__version__},
            )
            write_report(fullpath(self.get("output")), document)
        return exit_status(reports)
