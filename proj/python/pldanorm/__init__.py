# Copyright 2026  pldanorm authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0

"""Two-factor PLDA speaker verification with blind per-speaker score
normalization.

The heavy lifting lives in the compiled extension; this package re-exports
its public names.
"""

from pldanorm._core import *  # noqa: F401,F403
from pldanorm._core import __doc__  # noqa: F401

__version__ = "0.1.0"
