# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

"""
Counter-based random streams.

Every random quantity is drawn from a Philox generator keyed by
``(master_seed, sample_index, stream)``. Streams never depend on the order in
which realizations are processed, so results are independent of the number
of workers.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["SeedLabel", "stream", "COUPLINGS", "PERTURBATION", "SAMPLER", "PAIRS"]

COUPLINGS = 0
PERTURBATION = 1
SAMPLER = 2
PAIRS = 3


@dataclass(frozen=True)
class SeedLabel:
    master_seed: int
    sample_index: int

    def __post_init__(self):
        if self.master_seed < 0 or self.sample_index < 0:
            raise ValueError("seed labels must be non-negative, got %r" % (self,))

    def as_list(self):
        return [self.master_seed, self.sample_index]


def stream(label, kind=COUPLINGS):
    """
    Return a fresh ``numpy.random.Generator`` for the given seed label and
    stream kind. Two calls with equal arguments yield identical streams.
    """
    if not isinstance(label, SeedLabel):
        label = SeedLabel(*label)
    seq = np.random.SeedSequence([label.master_seed, label.sample_index, kind])
    key = seq.generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
