"""Measurement-kernel backend selection.

The compiled Cython kernel is preferred when its extension module imported
cleanly; otherwise the numpy fallback serves, with an identical contract.
Selection happens once at import; callers can still force a backend by name
(the benchmark does, and tests cross-check the two against each other).
"""

from __future__ import annotations

from ..errors import RxChainError
from . import _kernel_numpy

try:
    from . import _kernel as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None

COMPILED_AVAILABLE = _compiled is not None


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if COMPILED_AVAILABLE else ("numpy",)


def default_backend_name() -> str:
    return "compiled" if COMPILED_AVAILABLE else "numpy"


def get_backend(name: str = "auto"):
    """Module providing measure_bins(); name is auto, compiled, or numpy."""
    if name == "auto":
        return _compiled if COMPILED_AVAILABLE else _kernel_numpy
    if name == "compiled":
        if not COMPILED_AVAILABLE:
            raise RxChainError(
                "compiled kernel unavailable (extension not built); use backend='numpy'"
            )
        return _compiled
    if name == "numpy":
        return _kernel_numpy
    raise RxChainError(f"unknown backend {name!r}; expected auto, compiled, or numpy")
