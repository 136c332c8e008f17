# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import os
from datetime import datetime, timezone

from .errors import ArgumentError, CapacityError, ConfigError, SamplingError, UnsupportedModelError
from .experiment import ExperimentConfig
from .identities import EXACTNESS, IDENTITIES, residual_scan
from .logging import colors, error, header, set_verbose, success, warning
from .report import load_report, report_document, summary_table, write_csv, write_report, write_timings
from .util import Timer, fullpath

__all__ = ["ExperimentRunner", "EXIT_OK", "EXIT_EXACTNESS", "EXIT_CONFIG", "EXIT_CAPACITY"]

EXIT_OK = 0
EXIT_EXACTNESS = 2
EXIT_CONFIG = 64
EXIT_CAPACITY = 65

# identities producing one report per size rather than a fitted scan
_PER_SIZE = ("ultrametricity_metric", "classical_shift_check")


def _version():
    from . import __version__

    return __version__


def exit_status(reports):
    """
    Only failing exactness-tier checks turn into a non-zero status.
    """
    for r in reports:
        if r.get("tier") == EXACTNESS and r.get("passed") is False:
            return EXIT_EXACTNESS
    return EXIT_OK


def log_outcome(d):
    name = d.get("identity")
    if "skipped" in d:
        warning("%s skipped: %s", name, d["skipped"])
    elif d.get("passed") is True:
        success("%s passed", name)
    elif d.get("passed") is False:
        if d.get("tier") == EXACTNESS:
            error("%s FAILED", name)
        else:
            warning("%s outside its error bars", name)
    elif d.get("metadata", {}).get("non_increasing") is False:
        warning("%s: trend is not non-increasing within error bars", name)


class ExperimentRunner(object):
    def __init__(self, **kwargs):
        self.config = kwargs

        if "no_colour" in kwargs:
            if kwargs["no_colour"]:
                colors.disable()
            else:
                colors.enable()
        if kwargs.get("verbose"):
            set_verbose()

    def get(self, key, default=None):
        value = self.config.get(key)
        return default if value is None else value

    def experiment(self):
        return ExperimentConfig.from_file(fullpath(self.get("config")))

    def output_dir(self, experiment):
        return fullpath(self.get("output") or experiment.output())

    def _beta_arguments(self, check):
        if check.name() != "gg_residual":
            return {"beta": check.get("beta")}
        for key in ("beta_interval", "beta"):
            if key in check.config:
                return {key: check.config[key]}
        if check.experiment.get("beta_interval") is not None:
            return {"beta_interval": check.experiment.get("beta_interval")}
        return {"beta": check.get("beta")}

    def arguments(self, check, experiment):
        name = check.name()
        kwargs = {
            "n_samples": check.get("n_samples"),
            "seed": experiment.master_seed(),
            "engine": check.get("engine", "exact"),
            "workers": experiment.workers(),
            "capacity": experiment.capacity(),
            "sampler": experiment.sampler() or None,
        }
        kwargs.update(self._beta_arguments(check))
        if name == "gg_residual":
            kwargs.update(
                n_replicas=check.get("n_replicas", 2),
                f=check.get("f", "c12"),
                power=check.get("power", 1),
                grid_points=check.get("grid_points", 9),
            )
            if "beta_interval" in kwargs:
                kwargs["beta_interval"] = [float(b) for b in kwargs["beta_interval"]]
        elif name == "replica_equivalence_residual":
            kwargs.update(which=str(check.get("which", "12-23")), moments=list(check.get("moments", [1, 1])))
        elif name == "ultrametricity_metric":
            kwargs.update(eps_grid=list(check.get("eps_grid", [0.05, 0.1, 0.2])))
        elif name == "stability_derivative":
            kwargs.update(
                f=check.get("f", "c12"),
                lambda_step=check.get("lambda_step", 1e-3),
                n_replicas=check.get("n_replicas"),
            )
        elif name == "deformation_shift_gap":
            kwargs.update(f=check.get("f", "c12"), lam=check.get("lambda", 1.0), n_replicas=check.get("n_replicas"))
        elif name == "temperature_shift_equivalence":
            kwargs.update(lam=check.get("lambda", 1.0))
        elif name == "classical_shift_check":
            return {
                "lam": check.get("lambda", 1.0),
                "beta": check.get("beta"),
                "f": check.get("f", "s0*s1"),
                "seed": experiment.master_seed(),
                "sample_index": check.get("sample_index", 0),
                "capacity": experiment.capacity(),
            }
        return kwargs

    def excluded(self, check, experiment):
        beta = check.get("beta") if check.name() != "gg_residual" or "beta_interval" not in check.config else None
        if beta is None:
            return None
        for b in experiment.excluded_betas():
            if abs(float(beta) - b) < 1e-9:
                return "beta = %g is on the exclusion list" % b
        return None

    def invoke(self, check, experiment):
        """
        Evaluate one identity entry; returns a list of report dicts.
        """
        name = check.name()
        fn = IDENTITIES[name]
        model = check.model()
        reason = self.excluded(check, experiment)
        if reason:
            return [{"kind": "skipped", "identity": name, "skipped": reason}]
        if name == "cw_factorization_check":
            return [fn(check.n_grid(), check.get("beta")).to_dict()]
        kwargs = self.arguments(check, experiment)
        if name == "fluctuation_scan":
            beta = kwargs.pop("beta")
            return [r.to_dict() for r in fn(model, beta, check.n_grid(), **kwargs)]
        if check.n_sites() is not None:
            return [fn(model, check.n_sites(), **kwargs).to_dict()]
        if name in _PER_SIZE:
            return [fn(model, n, **kwargs).to_dict() for n in check.n_grid()]
        quantity = "lhs" if name == "stability_derivative" else "residual"
        return [residual_scan(fn, model, check.n_grid(), quantity=quantity, **kwargs).to_dict()]

    def execute(self, experiment):
        reports, timings = [], []
        for i, check in enumerate(experiment.identities()):
            header("[%d] %s", i + 1, check.name())
            timer = Timer()
            try:
                out = self.invoke(check, experiment)
            except (ArgumentError, UnsupportedModelError) as e:
                raise ConfigError(str(e), line=check.line, path=experiment.file())
            except SamplingError as e:
                raise ConfigError("sampler settings: %s" % e, line=check.line, path=experiment.file())
            timings.append({"identity": check.name(), "index": i + 1, "elapsed": timer.elapsed_str(),
                            "seconds": timer.elapsed()})
            for k, d in enumerate(out):
                d["index"] = i + 1 if len(out) == 1 else "%d.%d" % (i + 1, k + 1)
                log_outcome(d)
            reports.extend(out)
        return reports, timings

    def run(self):
        timer = Timer()
        started = datetime.now(timezone.utc).isoformat()
        try:
            experiment = self.experiment()
            outdir = self.output_dir(experiment)
            header("Running experiment %s from %s", experiment.name(), experiment.file())
            reports, timings = self.execute(experiment)
        except ConfigError as e:
            error("ERROR: %s", e)
            return EXIT_CONFIG
        except CapacityError as e:
            error("ERROR: %s (engine %s, N = %d)", e, e.engine, e.n_sites)
            return EXIT_CAPACITY

        provenance = {
            "spinstab_version": _version(),
            "master_seed": experiment.master_seed(),
            "engine": experiment.engine(),
        }
        document = report_document(experiment.echo(), reports, provenance)
        path = write_report(outdir, document)
        for d in reports:
            write_csv(os.path.join(outdir, "%s-%s.csv" % (str(d["index"]).replace(".", "-"), d["identity"])), d)
        write_timings(
            outdir,
            {
                "started": started,
                "elapsed": timer.elapsed_str(),
                "workers": experiment.workers(),
                "output": outdir,
                "identities": timings,
            },
        )

        print(summary_table(reports))
        status = exit_status(reports)
        if status == EXIT_OK:
            success("Report written to %s", path)
        else:
            error("Exactness checks failed; report written to %s", path)
        return status

    def report(self):
        """
        Re-render the summary table of a stored report.
        """
        path = fullpath(self.get("directory", "."))
        try:
            document = load_report(path)
        except (OSError, ValueError) as e:
            error("ERROR: cannot read report from %s: %s", path, e)
            return EXIT_CONFIG
        print(summary_table(document["reports"]))
        return exit_status(document["reports"])
