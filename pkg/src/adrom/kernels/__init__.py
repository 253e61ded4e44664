"""Kernel backend selection.

Imports the compiled extension when available, otherwise falls back to the
numpy reference implementation. Set ``ADROM_FORCE_PYTHON=1`` to force the
fallback (used by the kernel benchmark and for debugging).
"""

import os

from . import _ref

if os.environ.get("ADROM_FORCE_PYTHON", "") not in ("", "0"):
    _impl = _ref
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _ref

BACKEND = _impl.BACKEND

rhs_full = _impl.rhs_full
rhs_rows = _impl.rhs_rows
jac_coeffs = _impl.jac_coeffs
rhs_stencil = _impl.rhs_stencil
jac_stencil = _impl.jac_stencil


def backends():
    """Return the available kernel backends keyed by name."""
    found = {"python": _ref}
    try:
        from . import _core
        found["compiled"] = _core
    except ImportError:
        pass
    return found
