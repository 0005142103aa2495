"""Compare the compiled kernels with the NumPy fallback.

    python benchmarks/bench_kernels.py [--n 20000] [--repeat 3]

Prints the best wall time per kernel and backend and the largest absolute
difference between the two backends' outputs.
"""
import argparse
import time

import numpy as np

from kepler_convexity import kernels
from kepler_convexity.convexity_geom import sample_bounded_surface, sample_directions


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _maxdiff(a, b):
    if isinstance(a, tuple):
        return max(_maxdiff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    return float(np.nanmax(np.abs(a - b))) if a.size else 0.0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "compiled" not in kernels.BACKENDS:
        print("compiled extension not built; only the fallback is available")
        return

    n = args.n
    c = -2.0
    pts = sample_bounded_surface(c, n, 1, include_special=False)
    d = sample_directions(n, 2)
    dw = d.copy()
    dw[:, 2:] *= 4.0
    rng = np.random.default_rng(3)
    m = rng.standard_normal((n, 3, 3))
    m = m + np.transpose(m, (0, 2, 1))

    cases = [
        ("jacobi_eigvalsh3", m, ()),
        ("rkp_diagnostics", pts, (c,)),
        ("rkp_ray_roots", d, (c, 1e-12, 1.0)),
        ("r3bp_ray_roots", dw, (0.3, -2.5, 0, 6.0, 600, 1e-12)),
        ("r3bp_fd_diagnostics", pts, (0.3, -2.5, 0, 1e-5)),
    ]
    print(f"{'kernel':<22}{'python [s]':>12}{'compiled [s]':>14}{'speedup':>10}{'max |diff|':>14}")
    for name, x, extra in cases:
        tp, op = _best(lambda: kernels.run_chunked(name, x, *extra, backend="python"), args.repeat)
        tc, oc = _best(lambda: kernels.run_chunked(name, x, *extra, backend="compiled"), args.repeat)
        print(f"{name:<22}{tp:>12.4f}{tc:>14.4f}{tp / tc:>10.1f}{_maxdiff(op, oc):>14.3g}")


if __name__ == "__main__":
    main()
