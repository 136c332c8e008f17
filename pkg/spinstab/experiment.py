# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import math
import os

from .errors import ArgumentError, ConfigError
from .exact import Capacity
from .model import Family, ModelSpec
from .parse import parse_yaml_file, parse_yaml_str, source_line, to_yaml_str

__all__ = ["ExperimentConfig", "IdentityCheck", "IDENTITY_PARAMETERS"]

_COMMON = {"model", "n_samples", "engine"}

IDENTITY_PARAMETERS = {
    "gg_residual": _COMMON
    | {"n_sites", "n_grid", "n_replicas", "f", "beta", "beta_interval", "power", "grid_points"},
    "replica_equivalence_residual": _COMMON | {"n_sites", "n_grid", "which", "moments", "beta"},
    "ultrametricity_metric": _COMMON | {"n_sites", "beta", "eps_grid"},
    "stability_derivative": _COMMON | {"n_sites", "n_grid", "f", "beta", "lambda_step", "n_replicas"},
    "deformation_shift_gap": _COMMON | {"n_sites", "n_grid", "f", "beta", "lambda", "n_replicas"},
    "classical_shift_check": {"model", "n_sites", "lambda", "beta", "f", "sample_index"},
    "cw_factorization_check": {"n_grid", "beta"},
    "temperature_shift_equivalence": _COMMON | {"n_sites", "n_grid", "beta", "lambda"},
    "fluctuation_scan": _COMMON | {"n_grid", "beta"},
}

def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_count(value, minimum=1):
    return isinstance(value, int) and not isinstance(value, bool) and value >= minimum


def _is_list(value, item):
    return isinstance(value, (list, tuple)) and len(value) > 0 and all(item(v) for v in value)


# value checks shared by the top level and the identity entries
_VALUE_CHECKS = {
    "beta": (lambda v: _is_number(v) and v >= 0, "a non-negative number"),
    "beta_interval": (
        lambda v: _is_list(v, _is_number) and len(v) == 2 and 0 <= v[0] < v[1],
        "a pair [low, high] with 0 <= low < high",
    ),
    "lambda": (_is_number, "a number"),
    "lambda_step": (lambda v: _is_number(v) and v > 0, "a positive number"),
    "n_sites": (_is_count, "a positive integer"),
    "n_samples": (_is_count, "a positive integer"),
    "n_replicas": (_is_count, "a positive integer"),
    "power": (_is_count, "a positive integer"),
    "grid_points": (_is_count, "a positive integer"),
    "sample_index": (lambda v: _is_count(v, 0), "a non-negative integer"),
    "n_grid": (lambda v: _is_list(v, _is_count), "a non-empty list of positive integers"),
    "eps_grid": (lambda v: _is_list(v, lambda e: _is_number(e) and e >= 0), "a list of non-negative numbers"),
    "moments": (lambda v: _is_list(v, _is_count), "a list of positive integers"),
    "excluded_betas": (lambda v: _is_list(v, _is_number), "a list of numbers"),
    "f": (lambda v: isinstance(v, str), "a monomial string"),
    "which": (lambda v: isinstance(v, str), "a string"),
    "engine": (lambda v: v in ("exact", "mc"), "exact or mc"),
}


# identities evaluated on a whole N grid at once
GRID_IDENTITIES = ("cw_factorization_check", "fluctuation_scan")

_TOP_LEVEL = {
    "name",
    "master_seed",
    "model",
    "engine",
    "n_samples",
    "workers",
    "output",
    "n_grid",
    "beta",
    "beta_interval",
    "capacity",
    "sampler",
    "excluded_betas",
    "identities",
}


class IdentityCheck(object):
    """
    One entry of the ``identities`` list: an identity name with its
    parameters, falling back on the experiment-wide defaults.
    """

    def __init__(self, name, experiment, line=None, **kwargs):
        self.config = kwargs
        self._name = name
        self.experiment = experiment
        self.line = line

    def get(self, key, default=None):
        if key in self.config:
            return self.config[key]
        return self.experiment.get(key, default)

    def name(self):
        return self._name

    def model(self):
        node = self.config.get("model")
        if node is None:
            return self.experiment.model()
        return self.experiment.model(node)

    def n_grid(self):
        if "n_sites" in self.config:
            return None
        grid = self.get("n_grid")
        return [int(n) for n in grid] if grid else None

    def n_sites(self):
        """
        The single size of this check: its own ``n_sites``, else the size
        given in the model section when no N grid applies.
        """
        if "n_sites" in self.config:
            return int(self.config["n_sites"])
        if self.get("n_grid"):
            return None
        node = self.config.get("model") or self.experiment.get("model") or {}
        return int(node["n_sites"]) if "n_sites" in node else None

    def betas(self):
        beta = self.get("beta")
        if beta is not None:
            return [float(beta)]
        return []

    def __str__(self):
        return "%s %s" % (self._name, dict(self.config))


class ExperimentConfig(object):
    """
    Experiment description loaded from YAML (or JSON).

    Keys set in the environment take precedence: ``SPINSTAB_WORKERS`` and
    ``SPINSTAB_OUTPUT_DIR``.
    """

    def __init__(self, config, filepath=None, env=True):
        self.filepath = filepath
        self.config = config
        if env:
            self.environment_overwrite()
        self.validate()

    @classmethod
    def from_file(cls, filepath, env=True):
        try:
            config = parse_yaml_file(filepath)
        except OSError as e:
            raise ConfigError("cannot read config: %s" % e.strerror, path=filepath)
        return cls(config, filepath, env)

    @classmethod
    def from_string(cls, text, env=True):
        return cls(parse_yaml_str(text), env=env)

    def get(self, key, default=None):
        return self.config[key] if key in self.config else default

    def fail(self, msg, node=None, key=None):
        raise ConfigError(msg, line=source_line(node if node is not None else self.config, key),
                          path=self.filepath)

    def name(self):
        return str(self.get("name", "experiment"))

    def master_seed(self):
        return int(self.config["master_seed"])

    def engine(self):
        return self.get("engine", "exact")

    def n_samples(self):
        return self.get("n_samples")

    def workers(self):
        return int(self.get("workers", 1))

    def output(self):
        return self.get("output", "spinstab-output")

    def capacity(self):
        return Capacity(**dict(self.get("capacity") or {}))

    def sampler(self):
        return dict(self.get("sampler") or {})

    def excluded_betas(self):
        return [float(b) for b in self.get("excluded_betas") or []]

    def model(self, node=None):
        node = self.config["model"] if node is None else node
        try:
            return ModelSpec.from_dict({"n_sites": _default_sites(node), **dict(node)})
        except (ArgumentError, ValueError, KeyError, TypeError) as e:
            self.fail("invalid model section: %s" % e, node)

    def identities(self):
        checks = []
        for i, entry in enumerate(self.get("identities") or []):
            for name, params in entry.items():
                checks.append(
                    IdentityCheck(name, self, line=source_line(self.config["identities"], i),
                                  **dict(params or {}))
                )
        return checks

    def file(self):
        return self.filepath

    def __str__(self):
        return str(self.config)

    def __repr__(self):
        return str(self.config)

    def yaml(self):
        return to_yaml_str(self.config)

    def echo(self):
        """
        Plain-data copy of the configuration for reports, without the
        execution settings that cannot change results.
        """
        return {k: v for k, v in _plain(self.config).items() if k not in ("workers", "output")}

    def environment_overwrite(self):
        if os.getenv("SPINSTAB_WORKERS"):
            self.config["workers"] = int(os.getenv("SPINSTAB_WORKERS"))
        if os.getenv("SPINSTAB_OUTPUT_DIR"):
            self.config["output"] = os.getenv("SPINSTAB_OUTPUT_DIR")

    def validate(self):
        if not isinstance(self.config, dict):
            raise ConfigError("config must be a mapping", path=self.filepath)
        for key in self.config:
            if key not in _TOP_LEVEL:
                self.fail("unknown key %r" % key, key=key)
        if "master_seed" not in self.config:
            self.fail("master_seed is required; runs are never auto-seeded")
        seed = self.config["master_seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            self.fail("master_seed must be a non-negative integer", key="master_seed")
        if "model" not in self.config:
            self.fail("a model section is required")
        self.model()
        w = self.get("workers", 1)
        if not isinstance(w, int) or w < 0:
            self.fail("workers must be a non-negative integer", key="workers")
        self.check_values(self.config)
        try:
            self.capacity()
        except TypeError as e:
            self.fail("invalid capacity section: %s" % e, key="capacity")

        identities = self.get("identities")
        if not identities:
            self.fail("no identities requested")
        for i, entry in enumerate(identities):
            if not isinstance(entry, dict) or len(entry) != 1:
                self.fail("each identity entry must be a single-key mapping", identities, i)
            for name, params in entry.items():
                if name not in IDENTITY_PARAMETERS:
                    self.fail("unknown identity %r" % name, identities, i)
                params = params or {}
                if not isinstance(params, dict):
                    self.fail("parameters of %s must be a mapping" % name, identities, i)
                for key in params:
                    if key not in IDENTITY_PARAMETERS[name]:
                        self.fail("%s takes no parameter %r" % (name, key), params, key)
                self.check_values(params, name)
                if "model" in params:
                    self.model(params["model"])
        for check in self.identities():
            self._validate_check(check)

    def check_values(self, node, owner=None):
        for key, (valid, expected) in _VALUE_CHECKS.items():
            if key in node and not valid(node[key]):
                where = "%s: " % owner if owner else ""
                self.fail("%s%s must be %s, got %r" % (where, key, expected, node[key]), node, key)

    def _validate_check(self, check):
        name = check.name()
        missing = None
        if name in GRID_IDENTITIES:
            if not check.get("n_grid"):
                missing = "an n_grid"
        elif check.n_sites() is None and not check.get("n_grid"):
            missing = "n_sites or an n_grid"
        if name == "gg_residual":
            if check.get("beta") is None and check.get("beta_interval") is None:
                missing = "beta or beta_interval"
        elif check.get("beta") is None:
            missing = "beta"
        if missing:
            raise ConfigError("%s needs %s" % (name, missing), line=check.line, path=self.filepath)


def _default_sites(node):
    """
    Model sections may omit ``n_sites``; sizes then come from the identity.
    """
    node = dict(node)
    if "n_sites" in node:
        return node["n_sites"]
    family = Family(str(node.get("family", "")).upper())
    if family is Family.EA:
        lattice = dict(node.get("lattice") or {})
        side = lattice.get("side", 2)
        return side ** int(lattice.get("dimension", 1))
    return 4


def _plain(node):
    if isinstance(node, dict):
        return {str(k): _plain(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_plain(v) for v in node]
    if isinstance(node, bool) or node is None or isinstance(node, str):
        return node
    if isinstance(node, int):
        return int(node)
    if isinstance(node, float):
        return float(node)
    return str(node)
