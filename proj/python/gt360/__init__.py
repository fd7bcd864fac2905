# Copyright 2026 The gt360 Authors
# SPDX-License-Identifier: Apache-2.0
"""gt360: 360-degree gaze target estimation (EC / OFT / IFT)."""

try:
    # Installed layout: the extension lives inside the package.
    from ._gt360 import *  # noqa: F401,F403
    from ._gt360 import __version__  # noqa: F401
except ImportError:
    # Build-tree layout: the extension sits on PYTHONPATH.
    from _gt360 import *  # noqa: F401,F403
    from _gt360 import __version__  # noqa: F401
