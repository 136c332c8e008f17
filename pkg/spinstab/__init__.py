# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

from spinstab.errors import *  # noqa
from spinstab.exact import *  # noqa
from spinstab.experiment import *  # noqa
from spinstab.identities import *  # noqa
from spinstab.logging import *  # noqa
from spinstab.model import *  # noqa
from spinstab.monomial import *  # noqa
from spinstab.montecarlo import *  # noqa
from spinstab.quench import *  # noqa
from spinstab.report import *  # noqa
from spinstab.rng import *  # noqa
from spinstab.runner import *  # noqa
from spinstab.scratch import *  # noqa
from spinstab.stats import *  # noqa
from spinstab.util import *  # noqa
from spinstab.verify import *  # noqa

__version__ = "0.1.0"
