"""Hot inner loops with a compiled (Cython) backend and a numpy fallback.

The compiled module is used when it was built at install time; setting
``GUGT_PURE_PYTHON=1`` forces the fallback.  ``BACKEND`` names the active one.
"""

import os

from . import _fallback

try:
    from . import _core as compiled
except ImportError:  # extension not built
    compiled = None

fallback = _fallback

if compiled is not None and not os.environ.get("GUGT_PURE_PYTHON"):
    _impl = compiled
    BACKEND = "compiled"
else:
    _impl = _fallback
    BACKEND = "python"

median_filter_shrink = _impl.median_filter_shrink
nearest_centroid = _impl.nearest_centroid
smo_solve = _impl.smo_solve

__all__ = ["BACKEND", "compiled", "fallback", "median_filter_shrink", "nearest_centroid", "smo_solve"]
