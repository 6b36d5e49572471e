"""Kernel backend selection.

Prefers the compiled extension ``_core`` and falls back to the pure-Python
module ``_purepy``; both expose the same operations with bit-identical
results. Set ``KHOPGAME_BACKEND=python`` or ``=compiled`` to force one
(forcing the compiled backend raises if the extension is missing).

Call sites go through the module attribute (``_backend.kernels.fn``) so a
test can swap the backend after import.
"""

from __future__ import annotations

import os

from .errors import ValidationError

_requested = os.environ.get("KHOPGAME_BACKEND", "").strip().lower()

if _requested in ("", "compiled"):
    try:
        from . import _core as kernels

        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import _purepy as kernels

        BACKEND = "python"
elif _requested == "python":
    from . import _purepy as kernels

    BACKEND = "python"
else:
    raise ValidationError(
        f"KHOPGAME_BACKEND must be 'compiled' or 'python', got {_requested!r}"
    )
