# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Columnar scratch files for overlap samples.

Little-endian layout::

    magic     4 bytes  b"SGOV"
    version   u32      1
    N         u32      number of sites
    R         u32      number of clones
    count     u64      number of rows
    rows      f8       count x R(R-1)/2 overlaps, row-major, pairs ordered
                       (1,2), (1,3), ..., (R-1,R)
"""

import numpy as np

from .errors import ArgumentError

__all__ = ["write_scratch", "read_scratch", "SCRATCH_MAGIC", "SCRATCH_VERSION"]

SCRATCH_MAGIC = b"SGOV"
SCRATCH_VERSION = 1

_HEADER = np.dtype(
    [
        ("magic", "S4"),
        ("version", "<u4"),
        ("n_sites", "<u4"),
        ("n_clones", "<u4"),
        ("count", "<u8"),
    ]
)


def write_scratch(path, samples):
    header = np.zeros(1, dtype=_HEADER)
    header["magic"] = SCRATCH_MAGIC
    header["version"] = SCRATCH_VERSION
    header["n_sites"] = samples.n_sites
    header["n_clones"] = samples.n_clones
    header["count"] = len(samples)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(np.ascontiguousarray(samples.samples, dtype="<f8").tobytes())


def read_scratch(path):
    """
    Return the header as a dict and the (count, n_pairs) sample array.
    """
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _HEADER.itemsize:
        raise ArgumentError("%s is too short for a scratch header" % path)
    header = np.frombuffer(raw[: _HEADER.itemsize], dtype=_HEADER)[0]
    if bytes(header["magic"]) != SCRATCH_MAGIC:
        raise ArgumentError("%s is not an overlap scratch file" % path)
    if int(header["version"]) != SCRATCH_VERSION:
        raise ArgumentError("unsupported scratch version %d" % int(header["version"]))
    n_clones = int(header["n_clones"])
    count = int(header["count"])
    n_pairs = n_clones * (n_clones - 1) // 2
    body = np.frombuffer(raw[_HEADER.itemsize :], dtype="<f8")
    if body.size != count * n_pairs:
        raise ArgumentError("%s holds %d values, expected %d" % (path, body.size, count * n_pairs))
    meta = {
        "version": int(header["version"]),
        "n_sites": int(header["n_sites"]),
        "n_clones": n_clones,
        "count": count,
    }
    return meta, body.reshape(count, n_pairs).astype(np.float64)
