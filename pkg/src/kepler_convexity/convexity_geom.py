"""Geometry of the regularized energy surface ``F = 0``.

``F(z, w, c) = -1 + 4 b a^2 - 2 c a^2`` with ``a = |z|^2 + |w|^2`` and
``b = w1 z2 - z1 w2``, coordinates ordered ``(z1, z2, w1, w2)``.  The bounded
component of ``{F = 0}`` is strictly convex iff the Hessian of ``F``
restricted to its tangent spaces is positive definite.  This module builds
every object exactly (``build_symbolic``) and evaluates it numerically over
seeded samples (``certify_convexity``).
"""
from __future__ import annotations

import enum
import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import _fallback, kernels
from .errors import ConstructionError, DegenerateFrameError, DomainError, RootBracketError
from .kepler_maps import ANGULAR_SIGN, CRITICAL_VALUE, LCState, pullback_hamiltonian
from .polycore import ZW, PolyMatrix3, Ring, SparsePoly, identity_on_grid, poly_det3, pseudo_rem_linear

FRAME_TOL = 1e-10
DH_CONSTANT = 524288  # 2**19
AXIS_SPLIT = Fraction(7, 18)  # case split on a^2

ABC = Ring(("a", "b", "c"))
AC = Ring(("a", "c"))


# ---------------------------------------------------------------------------
# exact objects


def _zw():
    z1, z2, w1, w2, c = ZW.gens()
    a = z1**2 + z2**2 + w1**2 + w2**2
    b = w1 * z2 - z1 * w2
    return z1, z2, w1, w2, c, a, b


def factor_polys(ring: Ring = ABC):
    """f1..f4 as polynomials in (a, b, c)."""
    a, b, c = ring.gens()
    f1 = -2 * c + a + 4 * b
    f2 = -2 * c - a + 4 * b
    f3 = -4 * c**3 + 28 * b * c**2 - (88 * b**2 - 7 * a**2) * c + 96 * b**3 - 15 * a**2 * b
    f4 = 4 * c**2 - 24 * b * c + a**2 + 32 * b**2
    return f1, f2, f3, f4


def gradient_quadruple_polys():
    """The cubic quadruple g with grad F = a g, written out term by term."""
    z1, z2, w1, w2, c = ZW.gens()
    g1 = -4 * w1**2 * w2 + 16 * w1 * z1 * z2 - 4 * w2**3 - 20 * w2 * z1**2 - 4 * w2 * z2**2 - 8 * c * z1
    g2 = 4 * w1**3 + 4 * w1 * w2**2 + 4 * w1 * z1**2 + 20 * w1 * z2**2 - 16 * w2 * z1 * z2 - 8 * c * z2
    g3 = 20 * w1**2 * z2 - 16 * w1 * w2 * z1 + 4 * w2**2 * z2 + 4 * z1**2 * z2 + 4 * z2**3 - 8 * c * w1
    g4 = -4 * w1**2 * z1 + 16 * w1 * w2 * z2 - 20 * w2**2 * z1 - 4 * z1**3 - 4 * z1 * z2**2 - 8 * c * w2
    return g1, g2, g3, g4


def frame_polys(g):
    g1, g2, g3, g4 = g
    return (
        (-g2, g1, g4, -g3),
        (-g3, -g4, g1, g2),
        (-g4, g3, -g2, g1),
    )


def onshell_numerator_poly(ring: Ring = AC) -> SparsePoly:
    """N(a, c) = 12 c^2 a^4 - 2 c a^8 - 15 a^6 + 14 c a^2 + 6."""
    a, c = ring.gens()
    return 12 * c**2 * a**4 - 2 * c * a**8 - 15 * a**6 + 14 * c * a**2 + 6


@dataclass(frozen=True)
class SymbolicArtifacts:
    F: SparsePoly
    a: SparsePoly
    b: SparsePoly
    dF: tuple
    hessian: tuple
    g: tuple
    frame: tuple
    M: PolyMatrix3
    DH: SparsePoly
    N: SparsePoly
    factors_zw: tuple = field(repr=False)


@functools.lru_cache(maxsize=None)
def build_symbolic() -> SymbolicArtifacts:
    """Construct F, its derivatives, the frame-conjugated Hessian and DH exactly.

    ``g`` is obtained by exact division of the partials by ``a``; the written
    out quadruple of :func:`gradient_quadruple_polys` must agree with it.
    """
    z1, z2, w1, w2, c, a, b = _zw()
    F = -1 + 4 * b * a**2 - 2 * c * a**2
    dF = tuple(F.diff(i) for i in range(4))
    hess = tuple(tuple(dF[i].diff(j) for j in range(4)) for i in range(4))
    try:
        g = tuple(d.exact_div(a) for d in dF)
    except ArithmeticError as exc:
        raise ConstructionError("a does not divide a partial derivative of F") from exc
    for gi, gw in zip(g, gradient_quadruple_polys()):
        if gi != gw:
            raise ConstructionError(f"written-out gradient component disagrees: {gw - gi}")
    frame = frame_polys(g)
    zero = SparsePoly.zero(ZW)
    hv = [[sum((hess[i][k] * v[k] for k in range(4)), zero) for i in range(4)] for v in frame]
    M = PolyMatrix3([[sum((frame[i][k] * hv[j][k] for k in range(4)), zero) for j in range(3)] for i in range(3)])
    DH = poly_det3(M)
    factors_zw = tuple(f.compose([a, b, c]) for f in factor_polys(ABC))
    return SymbolicArtifacts(F, a, b, dF, hess, g, frame, M, DH, onshell_numerator_poly(AC), factors_zw)


class Outcome(enum.Enum):
    EXACT = "ExactIdentity"
    MODULO_F = "IdentityModuloF"
    FAILURE = "Failure"


@dataclass
class FactorizationResult:
    outcome: Outcome
    residual_terms: int
    witness: tuple | None = None

    def as_dict(self):
        return {
            "outcome": self.outcome.value,
            "residual_terms": self.residual_terms,
            "witness": None if self.witness is None else [str(v) for v in self.witness],
        }


def factored_DH(sym: SymbolicArtifacts | None = None) -> SparsePoly:
    sym = sym or build_symbolic()
    f1, f2, f3, f4 = sym.factors_zw
    return DH_CONSTANT * sym.a**6 * f1 * f2 * f3 * f4**2


def verify_factorization() -> FactorizationResult:
    """Compare DH with 2**19 a^6 f1 f2 f3 f4^2, off-shell first, then modulo F."""
    sym = build_symbolic()
    D = sym.DH - factored_DH(sym)
    if D.is_zero():
        return FactorizationResult(Outcome.EXACT, 0)
    if pseudo_rem_linear(D, sym.F, "c").is_zero():
        return FactorizationResult(Outcome.MODULO_F, len(D))
    # rational witness on F = 0: pick (z, w), solve F = 0 for c
    for pt in ((1, 0, 0, 1), (1, 2, 3, 5), (2, 1, 1, 3)):
        zw = tuple(Fraction(v) for v in pt)
        aa = sum(v * v for v in zw)
        bb = zw[2] * zw[1] - zw[0] * zw[3]
        cc = (4 * bb * aa**2 - 1) / (2 * aa**2)
        if D.eval(zw + (cc,)) != 0:
            return FactorizationResult(Outcome.FAILURE, len(D), zw + (cc,))
    return FactorizationResult(Outcome.FAILURE, len(D))


def exact_factor_identities() -> dict[str, bool]:
    """The identities behind the positivity argument, checked two ways.

    Each entry is True iff the canonical-form difference vanishes *and* the
    unexpanded sides agree on an integer grid beyond their degrees.
    """
    a, b, c = ABC.gens()
    f1, f2, f3, f4 = factor_polys(ABC)
    out = {}

    d = f4 - 4 * (3 * b - c) ** 2 - (a**2 - 4 * b**2)
    ok, _ = identity_on_grid(
        lambda A, B, C: f4_value(A, B, C) - 4 * (3 * B - C) ** 2,
        lambda A, B, C: A * A - 4 * B * B,
        (2, 2, 2),
    )
    out["f4 - 4(3b-c)^2 = a^2 - 4b^2"] = d.is_zero() and ok

    # on-shell b = 1/(4a^2) + c/2 = (1 + 2 c a^2) / (4 a^2);  64 a^6 f3 = 16 N
    sub = f3.substitute_rational("b", 1 + 2 * c * a**2, 4 * a**2)
    N3 = _lift(onshell_numerator_poly(AC))
    ok, _ = identity_on_grid(
        lambda A, C: 4 * A**6 * f3_value(A, 1 / (4 * A * A) + C / 2, C),
        lambda A, C: numerator_value(A, C),
        (14, 3),
    )
    out["4a^6 f3|onshell = N(a,c)"] = (sub - 16 * N3).is_zero() and ok

    aa, cc = AC.gens()
    N = onshell_numerator_poly(AC)
    at_crit = N.compose([aa, SparsePoly.const(Fraction(-3, 2), AC)])
    rhs = 3 * (aa**2 - 1) ** 3 * (aa**2 - 2)
    ok, _ = identity_on_grid(
        lambda A: numerator_value(A, Fraction(-3, 2)),
        lambda A: 3 * (A * A - 1) ** 3 * (A * A - 2),
        (8,),
    )
    out["N(a,-3/2) = 3(a^2-1)^3(a^2-2)"] = (at_crit - rhs).is_zero() and ok

    # axis c* = -(7 - a^6)/(12 a^2); 144 a^4 N(a, c*) = 12 a^4 (-a^12 - 166 a^6 + 23)
    N_c = N.substitute_rational("c", -(7 - aa**6), 12 * aa**2)
    rhs = 12 * aa**4 * (-(aa**12) - 166 * aa**6 + 23)
    ok, _ = identity_on_grid(
        lambda A: 12 * numerator_value(A, -(7 - A**6) / (12 * A * A)),
        lambda A: -(A**12) - 166 * A**6 + 23,
        (16,),
    )
    out["12 N(a, c*) = -a^12 - 166 a^6 + 23"] = (N_c - rhs).is_zero() and ok
    return out


def _lift(p: SparsePoly) -> SparsePoly:
    """Embed a polynomial in (a, c) into (a, b, c)."""
    a, b, c = ABC.gens()
    return p.compose([a, c])


# ---------------------------------------------------------------------------
# scalar formulas (floats or Fractions)


class FactorValues(NamedTuple):
    f1: object
    f2: object
    f3: object
    f4: object


def f4_value(a, b, c):
    return 4 * c * c - 24 * b * c + a * a + 32 * b * b


def f3_value(a, b, c):
    return -4 * c**3 + 28 * b * c**2 - (88 * b**2 - 7 * a**2) * c + 96 * b**3 - 15 * a**2 * b


def factor_values(a, b, c) -> FactorValues:
    return FactorValues(-2 * c + a + 4 * b, -2 * c - a + 4 * b, f3_value(a, b, c), f4_value(a, b, c))


def numerator_value(a, c):
    """N(a, c) = 12 c^2 a^4 - 2 c a^8 - 15 a^6 + 14 c a^2 + 6."""
    a2 = a * a
    return 12 * c * c * a2**2 - 2 * c * a2**4 - 15 * a2**3 + 14 * c * a2 + 6


def axis_energy(a):
    """Vertex of c -> N(a, c): -(7 - a^6) / (12 a^2)."""
    return -(7 - a**6) / (12 * a * a)


def axis_value(a):
    """N at the vertex: (-a^12 - 166 a^6 + 23) / 12."""
    return axis_value_a2(a * a)


def axis_value_a2(a2):
    """Vertex value as a function of a^2 (exact for rational a^2)."""
    a6 = a2**3
    return (-a6 * a6 - 166 * a6 + 23) / 12


def crit_value(a):
    """N(a, -3/2) = 3 (a^2 - 1)^3 (a^2 - 2)."""
    a2 = a * a
    return 3 * (a2 - 1) ** 3 * (a2 - 2)


def f3_analysis(a, c, case: str | None = None) -> dict:
    """Trace of the positivity argument for the on-shell f3 at one (a, c).

    For ``a^2 >= 7/18`` the vertex lies right of -3/2, so N is decreasing on
    c < -3/2 and bounded below by N(a, -3/2).  Otherwise N is bounded below by
    its vertex value.  ``case`` forces one branch ("crit" or "axis"), used at
    the split point.
    """
    if not (0 < a < 1 and c < CRITICAL_VALUE):
        raise DomainError(f"f3 analysis needs 0 < a < 1 and c < -3/2, got a={a}, c={c}")
    a2 = a * a
    if case is None:
        case = "crit" if a2 >= AXIS_SPLIT else "axis"
    n = numerator_value(a, c)
    f3 = n / (4 * a**6)
    c_star = axis_energy(a)
    if case == "crit":
        bound = crit_value(a)
        checks = {"axis_right_of_crit": c_star > CRITICAL_VALUE, "N_ge_bound": n >= bound - 1e-9 * max(1.0, abs(bound))}
    elif case == "axis":
        bound = axis_value(a)
        checks = {"N_ge_bound": n >= bound - 1e-9 * max(1.0, abs(bound))}
    else:
        raise ValueError(f"unknown case {case!r}")
    checks["bound_positive"] = bound > 0
    checks["f3_positive"] = f3 > 0
    return {
        "a": a,
        "c": c,
        "case": case,
        "N": n,
        "f3": f3,
        "axis": c_star,
        "bound": bound,
        "checks": checks,
        "pass": all(checks.values()),
    }


# ---------------------------------------------------------------------------
# numeric geometry


def F_value(z, w, c):
    z, w = np.asarray(z, float), np.asarray(w, float)
    a = z @ z + w @ w
    b = w[0] * z[1] - z[0] * w[1]
    return -1.0 + 4.0 * b * a * a - 2.0 * c * a * a


def gradient_g(z, w, c):
    """Return (g, grad F) at one point; grad F = a g, order (z1, z2, w1, w2)."""
    z1, z2 = (float(v) for v in z)
    w1, w2 = (float(v) for v in w)
    g = np.array(
        [
            -4 * w1**2 * w2 + 16 * w1 * z1 * z2 - 4 * w2**3 - 20 * w2 * z1**2 - 4 * w2 * z2**2 - 8 * c * z1,
            4 * w1**3 + 4 * w1 * w2**2 + 4 * w1 * z1**2 + 20 * w1 * z2**2 - 16 * w2 * z1 * z2 - 8 * c * z2,
            20 * w1**2 * z2 - 16 * w1 * w2 * z1 + 4 * w2**2 * z2 + 4 * z1**2 * z2 + 4 * z2**3 - 8 * c * w1,
            -4 * w1**2 * z1 + 16 * w1 * w2 * z2 - 20 * w2**2 * z1 - 4 * z1**3 - 4 * z1 * z2**2 - 8 * c * w2,
        ]
    )
    a = z1 * z1 + z2 * z2 + w1 * w1 + w2 * w2
    return g, a * g


def hessian_F(z, w, c) -> np.ndarray:
    """4x4 Hessian of F from the closed form of its second derivatives."""
    x = np.concatenate([np.asarray(z, float), np.asarray(w, float)])[None, :]
    _, h = _fallback.rkp_grad_hess(x, c)
    out = np.empty((4, 4))
    for (i, j), v in h.items():
        out[i, j] = out[j, i] = v[0]
    return out


def tangent_frame(g) -> np.ndarray:
    """Rows g*i, g*j, g*k (quaternion right multiplication)."""
    g1, g2, g3, g4 = (float(v) for v in g)
    if np.sqrt(g1 * g1 + g2 * g2 + g3 * g3 + g4 * g4) <= FRAME_TOL:
        raise DegenerateFrameError("gradient too small for a tangent frame")
    return np.array([[-g2, g1, g4, -g3], [-g3, -g4, g1, g2], [-g4, g3, -g2, g1]])


def tangential_hessian(z, w, c):
    """(M, det M, min eigenvalue of M / |g|^2) with M = V Hess(F) V^T."""
    g, _ = gradient_g(z, w, c)
    V = tangent_frame(g)
    M = V @ hessian_F(z, w, c) @ V.T
    M = 0.5 * (M + M.T)
    det = _det3(M)
    eig = kernels.get("jacobi_eigvalsh3")((M / (g @ g))[None])[0]
    return M, det, float(eig[0])


def _det3(m):
    return float(
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def dh_factored_value(a, b, c):
    f1, f2, f3, f4 = factor_values(a, b, c)
    return DH_CONSTANT * a**6 * f1 * f2 * f3 * f4**2


# ---------------------------------------------------------------------------
# sampling and certification


def axis_radius(c: float) -> float:
    """|z| on the z-axis (w = 0) and |w| on the collision circle (z = 0): (-2c)^(-1/4)."""
    return (-2.0 * c) ** -0.25


def special_points(c: float) -> np.ndarray:
    """Two z-axis points and two collision-circle points of the bounded component."""
    t = axis_radius(c)
    return np.array([[t, 0, 0, 0], [-t, 0, 0, 0], [0, 0, t, 0], [0, 0, 0, t]], dtype=float)


def sample_directions(count: int, seed: int) -> np.ndarray:
    d = np.random.default_rng(seed).standard_normal((count, 4))
    return d / np.sqrt(np.sum(d * d, axis=1))[:, None]


def sample_bounded_surface(c: float, count: int, seed: int, jobs: int = 1, include_special: bool = True) -> np.ndarray:
    """Seeded points on the bounded component: one per ray from the origin.

    Directions are uniform on S^3 (the points are not uniform on the surface).
    Along each ray F goes from -1 at the origin to a positive value at
    ``t = 1`` (the bounded component has a < 1), with a single crossing.
    """
    if not c < CRITICAL_VALUE:
        raise DomainError(f"energy {c} is not below the critical value -3/2")
    if count < 1:
        raise ValueError("count must be >= 1")
    d = sample_directions(count, seed)
    t = kernels.run_chunked("rkp_ray_roots", d, c, 1e-12, 1.0, jobs=jobs)
    if np.any(~np.isfinite(t)):
        raise RootBracketError(f"{int(np.sum(~np.isfinite(t)))} rays without a sign change at c={c}")
    pts = d * t[:, None]
    if include_special:
        pts = np.concatenate([pts, special_points(c)])
    return pts


@dataclass
class ConvexityCertificate:
    c: float
    samples: int
    seed: int
    min_det: float
    min_eig: float
    argmin: list
    factor_minima: dict
    violations: list
    passed: bool
    sigma: int = ANGULAR_SIGN
    anomalies: int = 0
    max_abs_F: float = 0.0
    max_a: float = 0.0
    max_2b_minus_a: float = 0.0

    def as_dict(self) -> dict:
        return {
            "c": self.c,
            "samples": self.samples,
            "seed": self.seed,
            "sigma": self.sigma,
            "min_det": self.min_det,
            "min_eig": self.min_eig,
            "argmin": list(self.argmin),
            "factor_minima": dict(self.factor_minima),
            "violations": list(self.violations),
            "pass": self.passed,
            "anomalies": self.anomalies,
            "max_abs_F": self.max_abs_F,
            "max_a": self.max_a,
            "max_2b_minus_a": self.max_2b_minus_a,
        }


def diagnose_points(pts: np.ndarray, c: float, jobs: int = 1):
    """Per-point (det, eigenvalues, |g|^2, F) from the active kernel backend."""
    return kernels.run_chunked("rkp_diagnostics", pts, c, jobs=jobs)


def certify_convexity(c: float, count: int, seed: int, jobs: int = 1) -> ConvexityCertificate:
    """Sampled strict-convexity certificate for the bounded component at energy c.

    F < 0 inside (F(0) = -1), so the outward normal is grad F and convexity
    means a positive definite tangential Hessian of F.
    """
    pts = sample_bounded_surface(c, count, seed, jobs=jobs)
    det, eig, gn2, fval = diagnose_points(pts, c, jobs=jobs)
    degenerate = gn2 <= FRAME_TOL**2
    n_anom = int(degenerate.sum())
    if n_anom > 1e-3 * len(pts):
        raise DegenerateFrameError(f"{n_anom} of {len(pts)} samples have a degenerate frame")
    good = ~degenerate
    a = np.sum(pts * pts, axis=1)
    b = pts[:, 2] * pts[:, 1] - pts[:, 0] * pts[:, 3]
    fv = factor_values(a, b, c)
    min_eig_pt = eig[:, 0]
    bad = good & ~((min_eig_pt > 0) & (det > 0))
    violations = [
        {"point": [float(v) for v in pts[i]], "eigenvalues": [float(v) for v in eig[i]]} for i in np.flatnonzero(bad)
    ]
    idx = np.flatnonzero(good)
    k = idx[int(np.argmin(min_eig_pt[idx]))]
    min_eig = float(min_eig_pt[k])
    return ConvexityCertificate(
        c=float(c),
        samples=int(len(pts)),
        seed=int(seed),
        min_det=float(np.min(det[idx])),
        min_eig=min_eig,
        argmin=[float(v) for v in pts[k]],
        factor_minima={f"f{i + 1}": float(np.min(v[idx])) for i, v in enumerate(fv)},
        violations=violations,
        passed=bool(min_eig > 0 and not violations),
        anomalies=n_anom,
        max_abs_F=float(np.max(np.abs(fval))),
        max_a=float(np.max(a)),
        max_2b_minus_a=float(np.max(2 * np.abs(b) - a)),
    )


def onshell_points(count: int, seed: int, scale: float = 1.0):
    """Random (z, w) with c set to their own pullback energy, so F = 0 holds there."""
    x = np.random.default_rng(seed).standard_normal((count, 4)) * scale
    c = pullback_hamiltonian(LCState.from_array(x))
    return x, c
