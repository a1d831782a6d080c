"""Hot-loop kernels: compiled Cython extension with a pure NumPy fallback.

The extension is selected at import time.  Set ``MAGNIGLYPH_NO_EXT=1`` to
force the pure backend.  Both backends perform the same floating-point
operations in the same order, so their outputs are bit-identical.
"""

import os

from . import _pure

if os.environ.get("MAGNIGLYPH_NO_EXT"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

bilinear_resample = _impl.bilinear_resample
diffuse_fill = _impl.diffuse_fill

__all__ = ["BACKEND", "bilinear_resample", "diffuse_fill"]
