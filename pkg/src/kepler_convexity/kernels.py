"""Backend selection for the per-point kernels.

The compiled extension ``_kernels`` is used when it imports; otherwise the
NumPy implementations in ``_fallback`` are used.  Setting the environment
variable ``KEPLER_CONVEXITY_PURE=1`` forces the fallback.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _fallback

try:
    if os.environ.get("KEPLER_CONVEXITY_PURE", "") not in ("", "0"):
        raise ImportError("pure backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

BACKEND = "compiled" if _compiled is not None else "python"

_KERNELS = (
    "jacobi_eigvalsh3",
    "rkp_F",
    "rkp_diagnostics",
    "rkp_ray_roots",
    "r3bp_K",
    "r3bp_ray_roots",
    "r3bp_fd_diagnostics",
)

CHUNK = 2048


def get(name: str, backend: str | None = None):
    """Return the kernel ``name`` from ``backend`` (default: the active one)."""
    if name not in _KERNELS:
        raise KeyError(name)
    return getattr(BACKENDS[backend or BACKEND], name)


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_chunked(name: str, x: np.ndarray, *args, jobs: int = 1, backend: str | None = None):
    """Apply a row-wise kernel to ``x`` in fixed-size chunks, optionally on threads.

    Chunk boundaries do not depend on ``jobs`` and outputs are concatenated in
    index order, so results are identical for every degree of parallelism.
    The compiled kernels release the GIL.
    """
    fn = get(name, backend)
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = x.shape[0]
    if n == 0:
        return fn(x, *args)
    bounds = [(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]
    if jobs <= 1 or len(bounds) == 1:
        parts = [fn(x[i:j], *args) for i, j in bounds]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda ij: fn(x[ij[0]:ij[1]], *args), bounds))
    if isinstance(parts[0], tuple):
        return tuple(np.concatenate([p[k] for p in parts]) for k in range(len(parts[0])))
    return np.concatenate(parts)
