# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Console logging for experiment runs.

Messages go to the ``spinstab`` logger; colours are switched on for true
terminals unless ``NO_COLOR`` is set, and the starting level can be chosen
with ``SPINSTAB_LOG_LEVEL``.
"""

import logging
import os
import sys

__all__ = [
    "debug",
    "info",
    "header",
    "success",
    "warning",
    "error",
    "progress",
    "set_verbose",
    "logger",
    "colors",
    "DEBUG",
    "INFO",
    "WARNING",
    "ERROR",
]

_CODES = {
    "HEADER": "\033[95m%s\033[0m",
    "OKBLUE": "\033[94m%s\033[0m",
    "OKGREEN": "\033[92m%s\033[0m",
    "WARNING": "\033[93m%s\033[0m",
    "FAIL": "\033[91m%s\033[0m",
    "BOLD": "\033[1m%s\033[0m",
}


class colors:
    @staticmethod
    def enable():
        for name, code in _CODES.items():
            setattr(colors, name, code)

    @staticmethod
    def disable():
        for name in _CODES:
            setattr(colors, name, "%s")


if sys.stdout.isatty() and not os.getenv("NO_COLOR"):
    colors.enable()
else:
    colors.disable()


INFO = logging.INFO
DEBUG = logging.DEBUG
WARNING = logging.WARNING
ERROR = logging.ERROR

logger = logging.getLogger("spinstab")
logger.addHandler(logging.StreamHandler())
logger.setLevel(getattr(logging, os.getenv("SPINSTAB_LOG_LEVEL", "INFO").upper(), INFO))


def set_verbose(verbose=True):
    logger.setLevel(DEBUG if verbose else INFO)


def _emitter(level, colour):
    def emit(msg, *args, **kwargs):
        logger.log(level, getattr(colors, colour) % msg, *args, **kwargs)

    return emit


debug = _emitter(DEBUG, "OKBLUE")
info = _emitter(INFO, "OKBLUE")
header = _emitter(INFO, "HEADER")
success = _emitter(INFO, "OKGREEN")
warning = _emitter(WARNING, "WARNING")
error = _emitter(ERROR, "FAIL")


def progress(what, done, total, every=10):
    """
    Debug line every ``every`` completed items, and on the last one.
    """
    if total and (done == total or done % every == 0):
        debug("%s: %d/%d", what, done, total)
