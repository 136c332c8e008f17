# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

__all__ = [
    "SpinstabError",
    "ArgumentError",
    "CapacityError",
    "UnsupportedModelError",
    "SamplingError",
    "ConfigError",
]


class SpinstabError(RuntimeError):
    """
    Base class of every error raised by spinstab.
    """


class ArgumentError(SpinstabError, ValueError):
    pass


class CapacityError(SpinstabError):
    """
    Raised when an exact computation exceeds the configured size limits.
    """

    def __init__(self, engine, n_sites, limit, hint=None):
        self.engine = engine
        self.n_sites = n_sites
        self.limit = limit
        msg = "%s engine supports N <= %d, got N = %d" % (engine, limit, n_sites)
        if hint:
            msg += " (" + hint + ")"
        super().__init__(msg)


class UnsupportedModelError(SpinstabError):
    pass


class SamplingError(SpinstabError):
    pass


class ConfigError(SpinstabError):
    """
    Invalid experiment configuration, optionally anchored to a source line.
    """

    def __init__(self, msg, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where = str(path)
        if line is not None:
            where += ":%d" % line
        super().__init__((where + ": " if where else "") + msg)
