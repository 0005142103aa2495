"""Tangential-Hessian scan of the Levi-Civita regularized restricted three-body problem.

Rotating frame with primaries ``E = (-mu, 0)`` (mass ``1 - mu``) and
``M = (1 - mu, 0)`` (mass ``mu``)::

    H_mu = |p|^2/2 - (1-mu)/|q-E| - mu/|q-M| + (p1 q2 - p2 q1)

One primary is regularized by the chart ``Q = x_p + 2 z^2``,
``P = w / (4 conj z)`` (complex notation), the cotangent lift of the squaring
map, which is exactly canonical.  The regularized function is
``K = |z|^2 (H_mu(Q, P) - c)`` and ``K(0, w) = |w|^2/32 - m_p/2``.

The scan samples ``K = 0`` along rays from the origin of (z, w)-space and
evaluates finite-difference tangential Hessians in the quaternionic frame of
``grad K``.  With ``mu = 0`` the direct chart gives the negative control for
the rotating Kepler problem.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _fallback, kernels
from .convexity_geom import certify_convexity
from .errors import BracketError, DegenerateFrameError, DomainError, RootBracketError
from .kepler_maps import ANGULAR_SIGN, CRITICAL_VALUE

FD_STEP = 1e-5
GRAD_SKIP = 1e-8  # |grad K| below this: frame too close to degenerate, point skipped
HALVING_TOL = 0.01
K_TOL = 1e-10
MARCH_STEPS = 600
MARCH_T_MAX = 6.0
C_REF_OFFSET = 3.0

CSV_HEADER = ("mu", "c_crit", "energy", "fraction", "samples", "skipped", "min_eig", "min_det", "pass")


# ---------------------------------------------------------------------------
# planar problem


def _primaries(mu):
    return np.array([-mu, 0.0]), np.array([1.0 - mu, 0.0])


def _check_mu(mu, allow_zero=False):
    lo_ok = mu >= 0.0 if allow_zero else mu > 0.0
    if not (lo_ok and mu < 1.0):
        raise DomainError(f"mass ratio {mu} outside {'[0, 1)' if allow_zero else '(0, 1)'}")


def _distances(mu, q):
    E, M = _primaries(mu)
    d1 = np.linalg.norm(q - E, axis=-1)
    d2 = np.linalg.norm(q - M, axis=-1)
    if np.any(d1 == 0.0) or (mu > 0 and np.any(d2 == 0.0)):
        raise DomainError("q sits on a primary")
    return d1, d2


def r3bp_effective_potential(mu: float, q) -> np.ndarray:
    """U = -(1-mu)/|q-E| - mu/|q-M| - |q|^2/2."""
    _check_mu(mu, allow_zero=True)
    q = np.asarray(q, dtype=float)
    d1, d2 = _distances(mu, q)
    u = -(1.0 - mu) / d1 - 0.5 * np.sum(q * q, axis=-1)
    if mu > 0:
        u = u - mu / d2
    return u


def r3bp_hamiltonian(mu: float, q, p) -> np.ndarray:
    _check_mu(mu, allow_zero=True)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    d1, d2 = _distances(mu, q)
    h = 0.5 * np.sum(p * p, axis=-1) - (1.0 - mu) / d1 + (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0])
    if mu > 0:
        h = h - mu / d2
    return h


class L1Point(NamedTuple):
    x: float
    critical_value: float


def _dU_dx(mu, x):
    # derivative of U(x, 0) for -mu < x < 1 - mu
    return (1.0 - mu) / (x + mu) ** 2 - mu / (x - 1.0 + mu) ** 2 - x


def lagrange_L1(mu: float, tol: float = 1e-12) -> L1Point:
    """Collinear critical point between the primaries and its energy c1(mu)."""
    _check_mu(mu)
    lo, hi = -mu, 1.0 - mu
    span = hi - lo
    a, b = lo + 1e-9 * span, hi - 1e-9 * span
    if not (_dU_dx(mu, a) > 0.0 > _dU_dx(mu, b)):
        raise BracketError(f"dU/dx has no sign change between the primaries for mu={mu}")
    while b - a > tol:
        m = 0.5 * (a + b)
        d = _dU_dx(mu, m)
        if d == 0.0:
            a = b = m
            break
        if d > 0.0:
            a = m
        else:
            b = m
    x = 0.5 * (a + b)
    return L1Point(x, float(r3bp_effective_potential(mu, np.array([x, 0.0]))))


def first_critical_value(mu: float) -> float:
    if mu == 0.0:
        return CRITICAL_VALUE
    return lagrange_L1(mu).critical_value


# ---------------------------------------------------------------------------
# regularized surface


@dataclass(frozen=True)
class RegularizedSurfaceSpec:
    """Energy surface of one regularized primary.

    ``primary`` is "heavy" or "light"; for mu = 1/2 "heavy" means E.
    ``chart`` is "lc" (the direct Levi-Civita chart) or "ls", which for
    mu = 0 replaces K by the Ligon-Schaaf composed function F.
    """

    mu: float
    c: float
    primary: str = "heavy"
    chart: str = "lc"
    c_crit: float = field(init=False)

    def __post_init__(self):
        _check_mu(self.mu, allow_zero=True)
        if self.primary not in ("heavy", "light"):
            raise DomainError(f"primary must be heavy or light, got {self.primary!r}")
        if self.chart not in ("lc", "ls"):
            raise DomainError(f"unknown chart {self.chart!r}")
        if self.mu == 0.0 and self.primary != "heavy":
            raise DomainError("mu = 0 has a single primary")
        if self.chart == "ls" and self.mu != 0.0:
            raise DomainError("the Ligon-Schaaf chart exists only for mu = 0")
        c1 = first_critical_value(self.mu)
        if not self.c < c1:
            raise DomainError(f"energy {self.c} is not below c1({self.mu}) = {c1}")
        object.__setattr__(self, "c_crit", c1)

    @property
    def index(self) -> int:
        """0 regularizes E, 1 regularizes M."""
        heavy = 0 if self.mu <= 0.5 else 1
        return heavy if self.primary == "heavy" else 1 - heavy

    @property
    def primary_mass(self) -> float:
        return _fallback.r3bp_setup(self.mu, self.index)[1]

    def K(self, x: np.ndarray) -> np.ndarray:
        """Batched K on rows (z1, z2, w1, w2); no domain checks."""
        if self.chart == "ls":
            return _fallback.rkp_F(x, self.c)
        return _fallback.r3bp_K(x, self.mu, self.c, self.index)


def chart_map(spec: RegularizedSurfaceSpec, x) -> np.ndarray:
    """(z, w) -> (Q, P) in the rotating frame."""
    x = np.asarray(x, dtype=float)
    z = x[..., 0] + 1j * x[..., 1]
    w = x[..., 2] + 1j * x[..., 3]
    xp = _fallback.r3bp_setup(spec.mu, spec.index)[0]
    Q = xp + 2.0 * z * z
    P = w / (4.0 * np.conj(z))
    return np.stack([Q.real, Q.imag, P.real, P.imag], axis=-1)


def chart_symplecticity_defect(spec: RegularizedSurfaceSpec, point, h: float = 1e-6) -> float:
    """max |J^T Omega J - Omega| for the chart at one point with z != 0."""
    point = np.asarray(point, dtype=float)
    if point[0] == 0.0 and point[1] == 0.0:
        raise DomainError("the chart is singular at z = 0")
    cols = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        cols.append((chart_map(spec, point + e) - chart_map(spec, point - e)) / (2.0 * h))
    J = np.stack(cols, axis=-1)
    om = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
    return float(np.max(np.abs(J.T @ om @ J - om)))


def regularized_hamiltonian(spec: RegularizedSurfaceSpec, z, w) -> float:
    """K(z, w) at a single point; finite over z = 0."""
    x = np.concatenate([np.asarray(z, float), np.asarray(w, float)])
    if not np.any(x):
        raise DomainError("(z, w) = (0, 0) is excluded")
    if spec.chart == "lc" and spec.mu > 0:
        xo = _fallback.r3bp_setup(spec.mu, spec.index)[2]
        Q = chart_map(spec, x)[:2] if np.any(x[:2]) else None
        if Q is not None and Q[0] == xo and Q[1] == 0.0:
            raise DomainError("point maps onto the other primary")
    with np.errstate(divide="ignore", invalid="ignore"):
        k = float(spec.K(x[None, :])[0])
    if not math.isfinite(k):
        raise DomainError("K is not finite here (preimage of the other primary)")
    return k


class SurfaceSample(NamedTuple):
    points: np.ndarray
    skipped: int
    requested: int


def _ray_directions(spec: RegularizedSurfaceSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    d = rng.standard_normal((count, 4))
    d /= np.sqrt(np.sum(d * d, axis=1))[:, None]
    # z-extent of the oval ~ 1/sqrt(-2c), |w| at the collision circle = 4 sqrt(m_p)
    d[:, :2] *= 1.0 / math.sqrt(-2.0 * spec.c)
    d[:, 2:] *= 4.0 * math.sqrt(spec.primary_mass)
    axes = np.array([[0, 0, 1, 0], [0, 0, -1, 0], [0, 0, 0, 1], [0, 0, 0, -1]], dtype=float)
    return np.concatenate([d, axes * 4.0 * math.sqrt(spec.primary_mass)])


def sample_regularized_surface(spec: RegularizedSurfaceSpec, count: int, seed, jobs: int = 1) -> SurfaceSample:
    """Seeded roots of K along rays from the origin, plus four collision points.

    Rays are marched on a fixed grid and the first sign change is bisected.
    Rays without a sign change are skipped and counted.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    d = _ray_directions(spec, count, rng)
    if spec.chart == "ls":
        t = kernels.run_chunked("rkp_ray_roots", d, spec.c, 1e-12, MARCH_T_MAX, jobs=jobs)
    else:
        t = kernels.run_chunked(
            "r3bp_ray_roots", d, spec.mu, spec.c, spec.index, MARCH_T_MAX, MARCH_STEPS, 1e-12, jobs=jobs
        )
    ok = np.isfinite(t)
    if not np.any(ok):
        raise RootBracketError(f"no ray crossed K = 0 for mu={spec.mu}, c={spec.c}")
    pts = d[ok] * t[ok, None]
    return SurfaceSample(pts, int(np.sum(~ok)), len(d))


class Diagnostics(NamedTuple):
    min_eig: np.ndarray
    det: np.ndarray
    eig: np.ndarray
    grad_norm: np.ndarray
    halving: np.ndarray
    skipped: np.ndarray  # boolean mask


def tangential_diagnostics(spec: RegularizedSurfaceSpec, points, h: float = FD_STEP, jobs: int = 1) -> Diagnostics:
    """Finite-difference tangential Hessian of K at on-shell points.

    Eigenvalues are those of M / |grad K|^2 with M = V Hess(K) V^T and V the
    quaternionic frame of grad K.  Points with |grad K| < 1e-8 are flagged in
    ``skipped``.
    """
    x = np.atleast_2d(np.asarray(points, dtype=float))
    if spec.chart == "ls":
        det, eig, gn2, halving = _fallback.fd_diagnostics(spec.K, x, h)
    else:
        det, eig, gn2, halving = kernels.run_chunked(
            "r3bp_fd_diagnostics", x, spec.mu, spec.c, spec.index, h, jobs=jobs
        )
    gnorm = np.sqrt(gn2)
    return Diagnostics(eig[:, 0], det, eig, gnorm, halving, gnorm < GRAD_SKIP)


def point_diagnostics(spec: RegularizedSurfaceSpec, point, h: float = FD_STEP):
    """(min_eig, det) at one point; DegenerateFrameError when |grad K| is too small."""
    dg = tangential_diagnostics(spec, point, h)
    if dg.skipped[0]:
        raise DegenerateFrameError(f"|grad K| = {dg.grad_norm[0]:.3g} at {point}")
    return float(dg.min_eig[0]), float(dg.det[0])


# ---------------------------------------------------------------------------
# scans


@dataclass
class ScanRow:
    mu: float
    c_crit: float
    energy: float
    fraction: float
    samples: int
    skipped: int
    min_eig: float
    min_det: float
    passed: bool
    primary: str = "heavy"
    max_abs_K: float = math.nan
    max_halving: float = math.nan
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "mu": self.mu,
            "c_crit": self.c_crit,
            "energy": self.energy,
            "fraction": self.fraction,
            "samples": self.samples,
            "skipped": self.skipped,
            "min_eig": self.min_eig,
            "min_det": self.min_det,
            "pass": self.passed,
            "primary": self.primary,
            "max_abs_K": self.max_abs_K,
            "max_halving": self.max_halving,
            "error": self.error,
        }


@dataclass
class ScanTable:
    rows: list
    seed: int
    count: int
    sigma: int = ANGULAR_SIGN

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.rows)

    def as_dict(self) -> dict:
        return {"seed": self.seed, "count": self.count, "sigma": self.sigma, "rows": [r.as_dict() for r in self.rows]}

    def to_csv(self) -> str:
        from .reports import scan_csv

        return scan_csv(self.rows)


def evaluate_surface(spec: RegularizedSurfaceSpec, count: int, seed, jobs: int = 1):
    """Sample and diagnose one surface; returns a dict of summary values."""
    smp = sample_regularized_surface(spec, count, seed, jobs=jobs)
    dg = tangential_diagnostics(spec, smp.points, jobs=jobs)
    keep = ~dg.skipped
    if not np.any(keep):
        raise DegenerateFrameError("every sample has a degenerate frame")
    kv = spec.K(smp.points)
    idx = np.flatnonzero(keep)
    k = idx[int(np.argmin(dg.min_eig[idx]))]
    return {
        "samples": int(keep.sum()),
        "skipped": smp.skipped + int(dg.skipped.sum()),
        "min_eig": float(dg.min_eig[k]),
        "min_det": float(np.min(dg.det[idx])),
        "argmin": [float(v) for v in smp.points[k]],
        "max_abs_K": float(np.max(np.abs(kv))),
        "max_halving": float(np.max(dg.halving[idx])),
    }


def scan_energy(c_crit: float, fraction: float, c_ref_offset: float = C_REF_OFFSET) -> float:
    """Energy at ``fraction`` of the way from c1 - offset up to c1."""
    if not 0.0 < fraction < 1.0:
        raise DomainError(f"fraction {fraction} outside (0, 1)")
    c_ref = c_crit - c_ref_offset
    return c_ref + fraction * (c_crit - c_ref)


def scan_grid(
    mu_list: Sequence[float],
    fractions: Sequence[float],
    count: int,
    seed: int,
    jobs: int = 1,
    primary: str = "heavy",
    c_ref_offset: float = C_REF_OFFSET,
) -> ScanTable:
    """One row per (mu, fraction), in input order.

    Row ``i`` is sampled with the generator seeded by ``(seed, i)``.  Errors in
    a row are recorded in it and the scan moves on.
    """
    rows = []
    i = 0
    for mu in mu_list:
        for f in fractions:
            try:
                c1 = first_critical_value(mu) if mu > 0 else math.nan
            except (DomainError, BracketError) as exc:
                rows.append(ScanRow(mu, math.nan, math.nan, f, 0, 0, math.nan, math.nan, False, primary, error=str(exc)))
                i += 1
                continue
            c = math.nan
            try:
                _check_mu(mu)
                c = scan_energy(c1, f, c_ref_offset)
                spec = RegularizedSurfaceSpec(mu, c, primary)
                r = evaluate_surface(spec, count, [seed, i], jobs=jobs)
                rows.append(
                    ScanRow(
                        mu, c1, c, f, r["samples"], r["skipped"], r["min_eig"], r["min_det"], r["min_eig"] > 0,
                        primary, r["max_abs_K"], r["max_halving"],
                    )
                )
            except (DomainError, RootBracketError, DegenerateFrameError) as exc:
                rows.append(ScanRow(mu, c1, c, f, 0, 0, math.nan, math.nan, False, primary, error=str(exc)))
            i += 1
    return ScanTable(rows, int(seed), int(count))


@dataclass
class ControlRow:
    energy: float
    direct_min_eig: float
    direct_min_det: float
    direct_argmin: list
    direct_pass: bool
    composed_min_eig: float
    composed_pass: bool
    samples: int
    skipped: int

    def as_dict(self) -> dict:
        return {
            "energy": self.energy,
            "direct_min_eig": self.direct_min_eig,
            "direct_min_det": self.direct_min_det,
            "direct_argmin": list(self.direct_argmin),
            "direct_pass": self.direct_pass,
            "composed_min_eig": self.composed_min_eig,
            "composed_pass": self.composed_pass,
            "samples": self.samples,
            "skipped": self.skipped,
        }


@dataclass
class ControlReport:
    rows: list
    seed: int
    count: int
    sigma: int = ANGULAR_SIGN

    @property
    def direct_fails_somewhere(self) -> bool:
        return any(not r.direct_pass for r in self.rows)

    @property
    def composed_all_pass(self) -> bool:
        return all(r.composed_pass for r in self.rows)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "count": self.count,
            "sigma": self.sigma,
            "direct_fails_somewhere": self.direct_fails_somewhere,
            "composed_all_pass": self.composed_all_pass,
            "rows": [r.as_dict() for r in self.rows],
        }


def direct_lc_control(c_grid: Sequence[float], count: int, seed: int, jobs: int = 1) -> ControlReport:
    """Rotating Kepler (mu = 0) through the direct Levi-Civita chart, next to
    the Ligon-Schaaf composed surface at the same energies."""
    rows = []
    for i, c in enumerate(c_grid):
        if not c < CRITICAL_VALUE:
            raise DomainError(f"energy {c} is not below -3/2")
        spec = RegularizedSurfaceSpec(0.0, c)
        r = evaluate_surface(spec, count, [seed, i], jobs=jobs)
        cert = certify_convexity(c, count, seed, jobs=jobs)
        rows.append(
            ControlRow(
                float(c), r["min_eig"], r["min_det"], r["argmin"], r["min_eig"] > 0,
                cert.min_eig, cert.passed, r["samples"], r["skipped"],
            )
        )
    return ControlReport(rows, int(seed), int(count))
