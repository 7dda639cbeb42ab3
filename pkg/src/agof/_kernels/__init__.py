"""Kernel backend selection.

Two interchangeable implementations of the hot numeric kernels exist: a
compiled one (numba) and a vectorised numpy fallback.  The active backend
is chosen once, lazily, from the AGOF_BACKEND environment variable
("numba" or "numpy"); when the variable is unset, numba is used if it
imports and numpy otherwise.  ``set_backend`` switches at runtime, which
the benchmark uses to compare the two.

Backends agree to within quadrature tolerances but are not bit-identical
to each other; results are deterministic within a backend.
"""

from __future__ import annotations

import os

from ..errors import DomainError
from ._gl import FAM_EXPONENTIAL, FAM_NORMAL, FAM_WEIBULL, FAM_MIXTURE

__all__ = [
    "available_backends",
    "backend_name",
    "set_backend",
    "level_power_integral",
    "pair_power_integral",
    "em_gmm",
    "FAM_EXPONENTIAL",
    "FAM_NORMAL",
    "FAM_WEIBULL",
    "FAM_MIXTURE",
]

_BACKENDS = ("numba", "numpy")
_active: str | None = None
_modules: dict[str, object] = {}


def available_backends() -> tuple[str, ...]:
    return _BACKENDS


def _load(name: str):
    mod = _modules.get(name)
    if mod is None:
        if name == "numpy":
            from . import numpy_backend as mod
        else:
            from . import numba_backend as mod
        _modules[name] = mod
    return mod


def _resolve_default() -> str:
    env = os.environ.get("AGOF_BACKEND", "").strip().lower()
    if env:
        if env not in _BACKENDS:
            raise DomainError(
                f"AGOF_BACKEND must be one of {_BACKENDS}, got {env!r}"
            )
        return env
    try:
        import numba  # noqa: F401
    except ImportError:
        return "numpy"
    return "numba"


def backend_name() -> str:
    """Name of the active backend, resolving it on first use."""
    global _active
    if _active is None:
        _active = _resolve_default()
    return _active


def set_backend(name: str) -> None:
    """Switch kernels to ``name`` ("numba" or "numpy"), loading it eagerly."""
    global _active
    if name not in _BACKENDS:
        raise DomainError(f"unknown backend {name!r}; choose from {_BACKENDS}")
    _load(name)
    _active = name


def level_power_integral(edges, levels, fam, params, p, rel_tol, max_subdiv):
    return _load(backend_name()).level_power_integral(
        edges, levels, fam, params, p, rel_tol, max_subdiv
    )


def pair_power_integral(edges, fam_f, params_f, fam_g, params_g, p, rel_tol, max_subdiv):
    return _load(backend_name()).pair_power_integral(
        edges, fam_f, params_f, fam_g, params_g, p, rel_tol, max_subdiv
    )


def em_gmm(x, w, mu, var, max_iter, rel_tol, var_floor):
    return _load(backend_name()).em_gmm(x, w, mu, var, max_iter, rel_tol, var_floor)
