import importlib
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kepler_convexity import _fallback, kernels
from kepler_convexity.convexity_geom import sample_bounded_surface, sample_directions

compiled = pytest.mark.skipif("compiled" not in kernels.BACKENDS, reason="extension not built")


def _sym(n, seed):
    m = np.random.default_rng(seed).standard_normal((n, 3, 3))
    return m + np.transpose(m, (0, 2, 1))


@pytest.mark.parametrize("backend", list(kernels.BACKENDS))
def test_jacobi_against_lapack(backend):
    m = _sym(2000, 1)
    ev = kernels.get("jacobi_eigvalsh3", backend)(m)
    np.testing.assert_allclose(ev, np.linalg.eigvalsh(m), atol=1e-11 * np.abs(m).max())


@pytest.mark.parametrize("backend", list(kernels.BACKENDS))
def test_jacobi_special_matrices(backend):
    f = kernels.get("jacobi_eigvalsh3", backend)
    m = np.array([np.diag([3.0, -1.0, 2.0]), np.zeros((3, 3)), np.ones((3, 3))])
    np.testing.assert_allclose(f(m), [[-1, 2, 3], [0, 0, 0], [0, 0, 3]], atol=1e-12)


@given(st.lists(st.floats(-1e3, 1e3), min_size=6, max_size=6))
def test_jacobi_trace_invariant(v):
    m = np.array([[v[0], v[1], v[2]], [v[1], v[3], v[4]], [v[2], v[4], v[5]]])
    ev = _fallback.jacobi_eigvalsh3(m[None])[0]
    assert np.all(np.diff(ev) >= 0)
    assert ev.sum() == pytest.approx(np.trace(m), abs=1e-9 * (1 + np.abs(m).max()))


@compiled
def test_backends_bit_identical():
    c = -2.0
    pts = sample_bounded_surface(c, 3000, 1, include_special=True)
    d = sample_directions(3000, 2)
    dw = d.copy()
    dw[:, 2:] *= 4
    cases = [
        ("jacobi_eigvalsh3", _sym(3000, 3), ()),
        ("rkp_F", pts, (c,)),
        ("rkp_diagnostics", pts, (c,)),
        ("rkp_ray_roots", d, (c, 1e-12, 1.0)),
        ("r3bp_K", pts, (0.3, -2.5, 1)),
        ("r3bp_ray_roots", dw, (0.3, -2.5, 0, 6.0, 600, 1e-12)),
        ("r3bp_fd_diagnostics", pts, (0.3, -2.5, 0, 1e-5)),
    ]
    for name, x, args in cases:
        a = kernels.run_chunked(name, x, *args, backend="python")
        b = kernels.run_chunked(name, x, *args, backend="compiled")
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        for u, v in zip(a, b):
            assert np.array_equal(u, v, equal_nan=True), name


@pytest.mark.parametrize("backend", list(kernels.BACKENDS))
def test_chunking_independent_of_jobs(backend):
    pts = sample_bounded_surface(-3.0, 7000, 5)
    r1 = kernels.run_chunked("rkp_diagnostics", pts, -3.0, jobs=1, backend=backend)
    r4 = kernels.run_chunked("rkp_diagnostics", pts, -3.0, jobs=4, backend=backend)
    for u, v in zip(r1, r4):
        assert u.tobytes() == v.tobytes()
    # a row's result does not depend on which batch it sits in
    one = kernels.get("rkp_diagnostics", backend)(pts[123:124], -3.0)
    for u, v in zip(one, r1):
        assert np.array_equal(u[0], v[123])


def test_empty_input():
    out = kernels.run_chunked("rkp_F", np.zeros((0, 4)), -2.0)
    assert out.shape == (0,)


def test_unknown_kernel():
    with pytest.raises(KeyError):
        kernels.get("nope")


def test_pure_env_forces_fallback():
    code = "import kepler_convexity.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, KEPLER_CONVEXITY_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_fd_hessian_of_quadratic():
    A = np.array([[2.0, 1, 0, 0], [1, 3, 0, 0], [0, 0, 1, 0.5], [0, 0, 0.5, 4]])
    f = lambda x: 0.5 * np.einsum("ni,ij,nj->n", x, A, x)
    x = np.random.default_rng(0).normal(size=(5, 4))
    g, h = _fallback.fd_grad_hess(f, x, 1e-3)
    np.testing.assert_allclose(g, x @ A, atol=1e-9)
    for (i, j), v in h.items():
        np.testing.assert_allclose(v, A[i, j], atol=1e-6)
