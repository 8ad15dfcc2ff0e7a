"""Integration-kernel backend selection.

The compiled Cython kernel is preferred when its extension module imported
cleanly; otherwise the numpy fallback is used. `STRATLAB_BACKEND=python`
forces the fallback (useful for benchmarking and debugging);
`STRATLAB_BACKEND=compiled` makes a missing extension a hard error.

Both backends expose
    integrate_modes(om0, th0, k, eta, beta, nu, kappa, t0, times, rtol, atol)
        -> (out[(nt, 2, n)] complex, status, t_reached)
for k != 0 mode batches.
"""
from __future__ import annotations

import os

from . import pyref

STATUS_OK = pyref.STATUS_OK
STATUS_STALL = pyref.STATUS_STALL

try:
    from . import _dp45 as compiled
except ImportError:  # pragma: no cover - depends on build environment
    compiled = None

_choice = os.environ.get("STRATLAB_BACKEND", "").strip().lower()
if _choice == "python":
    _active = pyref
elif _choice == "compiled":
    if compiled is None:
        raise ImportError("STRATLAB_BACKEND=compiled but the stratlab._kernels"
                          "._dp45 extension is not built")
    _active = compiled
elif _choice in ("", "auto"):
    _active = compiled if compiled is not None else pyref
else:
    raise ValueError(f"unknown STRATLAB_BACKEND value {_choice!r}")

BACKEND_NAME = "compiled" if _active is compiled and compiled is not None else "python"


def integrate_modes(om0, th0, k, eta, beta, nu, kappa, t0, times, rtol, atol):
    return _active.integrate_modes(om0, th0, k, eta, beta, nu, kappa,
                                   t0, times, rtol, atol)
