# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import math
import time

__all__ = ["cpu_count", "fullpath", "mkdir_p", "fsum", "Timer"]


def fullpath(path):
    if path:
        import os

        return os.path.abspath(os.path.expanduser(path))
    else:
        return path


def mkdir_p(path):
    import errno
    import os

    try:
        os.makedirs(path)
    except OSError as exc:
        if exc.errno == errno.EEXIST and os.path.isdir(path):
            pass
        else:
            raise RuntimeError("Could not create directory %s" % path)


def fsum(values):
    """
    Exactly rounded sum, independent of the order of ``values``.
    """
    return math.fsum(float(v) for v in values)


class Timer:
    def __init__(self):
        self.start = time.time()

    def restart(self):
        self.start = time.time()

    def elapsed(self):
        return time.time() - self.start

    def elapsed_str(self):
        m, s = divmod(self.elapsed(), 60)
        h, m = divmod(m, 60)
        time_str = "%02d:%02d:%02d" % (h, m, s)
        return time_str


def cpu_count():
    import multiprocessing
    import os

    if "SPINSTAB_WORKERS" in os.environ:
        return max(1, int(os.environ["SPINSTAB_WORKERS"]))

    threads = multiprocessing.cpu_count()
    if "SLURM_CPUS_PER_TASK" in os.environ:
        # Only available if specified explicitly at submission
        threads = int(os.environ["SLURM_CPUS_PER_TASK"])
    return threads
