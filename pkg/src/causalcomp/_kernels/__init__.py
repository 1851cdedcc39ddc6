"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
implementation. Set ``CAUSALCOMP_BACKEND=python`` to force the fallback.
"""

import os

from . import _sweep_py
from ._plan import Problem, Sweep, sweep_plan

BACKENDS = {"python": _sweep_py}

try:
    from . import _sweep as _sweep_c
except ImportError:  # extension not built
    _sweep_c = None
else:
    BACKENDS["cython"] = _sweep_c

_choice = os.environ.get("CAUSALCOMP_BACKEND", "").strip().lower()
if _choice and _choice not in BACKENDS:
    raise ImportError(f"CAUSALCOMP_BACKEND={_choice!r} is not available (have {sorted(BACKENDS)})")
backend = BACKENDS[_choice] if _choice else (_sweep_c or _sweep_py)
BACKEND = backend.NAME

BUDGET, NONPOSITIVE, MAX_STEPS = 0, 1, 2

__all__ = ["BACKEND", "BACKENDS", "Problem", "Sweep", "backend", "sweep_plan"]
