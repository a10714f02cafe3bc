"""Backend selection for the scenario kernel.

The compiled extension is used when it was built; otherwise the pure-Python
reference implementation. Both give bit-identical results.
"""

from __future__ import annotations

from types import ModuleType

from . import _pykernel

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKENDS: dict[str, ModuleType] = {"python": _pykernel}
if _ckernel is not None:
    BACKENDS["compiled"] = _ckernel

DEFAULT = BACKENDS.get("compiled", _pykernel)
BACKEND = DEFAULT.BACKEND
FEASIBILITY_TOL = _pykernel.FEASIBILITY_TOL
MAX_DIM = _pykernel.MAX_DIM


def get(name: str | None = None) -> ModuleType:
    """Kernel module by name (``"compiled"`` or ``"python"``); default picks the fastest available."""
    if name is None:
        return DEFAULT
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


n_params = _pykernel.n_params
decode = DEFAULT.decode
lengths = DEFAULT.lengths
objective = DEFAULT.objective
search = DEFAULT.search
