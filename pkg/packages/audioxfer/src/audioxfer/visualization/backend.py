"""Lazy access to the optional plotting stack.

Figures are written to PNG files by the CLI and by reports, usually on
machines without a display. The first ``pyplot()`` call therefore selects
the non-interactive Agg backend unless ``MPLBACKEND`` is set or pyplot is
already loaded.
"""

import os
import sys
from types import ModuleType

VIZ_EXTRA_HINT = "Install the plotting extra with: pip install 'audioxfer[viz]'"
HEADLESS_BACKEND = "Agg"


def pyplot() -> ModuleType:
    """Return ``matplotlib.pyplot``.

    Raises:
        ImportError: matplotlib is not installed
    """
    try:
        import matplotlib
    except ImportError as e:
        raise ImportError(f"matplotlib is required for figures. {VIZ_EXTRA_HINT}") from e
    if "MPLBACKEND" not in os.environ and "matplotlib.pyplot" not in sys.modules:
        matplotlib.use(HEADLESS_BACKEND)
    import matplotlib.pyplot as plt

    return plt


def seaborn() -> ModuleType:
    """Return ``seaborn``, used for confusion heatmaps.

    Raises:
        ImportError: seaborn is not installed
    """
    try:
        import seaborn as sns
    except ImportError as e:
        raise ImportError(f"seaborn is required for confusion heatmaps. {VIZ_EXTRA_HINT}") from e
    return sns
