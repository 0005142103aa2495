"""Rotating Kepler problem and its regularizing maps.

Chain of maps, all vectorized over leading array axes::

    (q, p)  --ligon_schaaf-->  (r, s) in T*S^2
            --stereo_unproject-->  (x, y)
            --lc_inverse-->  (z, w)  [two branches]

``compose_embedding`` runs the chain and lands on the level set of
``F = -1 + 4 b a^2 - 2 c a^2`` where ``a = |z|^2 + |w|^2`` and
``b = w1 z2 - z1 w2``.  Coordinates in R^4 are ordered ``(z1, z2, w1, w2)``.
"""
from __future__ import annotations

from typing import Callable, NamedTuple

import numpy as np

from .errors import CollisionError, DomainError

__all__ = [
    "PlanarState",
    "SphereCotangent",
    "StereoState",
    "LCState",
    "ANGULAR_SIGN",
    "CRITICAL_VALUE",
    "rkp_hamiltonian",
    "rkp_hamiltonian_completed",
    "effective_potential",
    "rkp_critical_value",
    "hill_bounded_radius",
    "kepler_energy",
    "ligon_schaaf",
    "ligon_schaaf_frame",
    "stereo_project",
    "stereo_unproject",
    "levi_civita",
    "lc_inverse",
    "compose_embedding",
    "momentum_swap",
    "pullback_hamiltonian",
    "surface_invariants",
    "F_level",
    "symplecticity_defect",
    "jacobian_fd",
    "CONFORMAL_FACTORS",
    "sample_negative_energy",
    "sample_bounded_component",
]

CRITICAL_VALUE = -1.5


class PlanarState(NamedTuple):
    q: np.ndarray
    p: np.ndarray


class SphereCotangent(NamedTuple):
    r: np.ndarray
    s: np.ndarray


class StereoState(NamedTuple):
    x: np.ndarray
    y: np.ndarray


class LCState(NamedTuple):
    z: np.ndarray
    w: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.z, self.w], axis=-1)

    @classmethod
    def from_array(cls, x) -> "LCState":
        x = np.asarray(x, dtype=float)
        return cls(x[..., :2], x[..., 2:])


def _arr(v):
    return np.asarray(v, dtype=float)


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _check_q(q):
    if np.any(np.linalg.norm(q, axis=-1) == 0.0):
        raise DomainError("q = 0 is a collision")


# ---------------------------------------------------------------------------
# Hamiltonians


def effective_potential(q) -> np.ndarray:
    """U(q) = -1/|q| - |q|^2/2."""
    q = _arr(q)
    _check_q(q)
    rho = np.linalg.norm(q, axis=-1)
    return -1.0 / rho - 0.5 * rho**2


def rkp_critical_value() -> float:
    return CRITICAL_VALUE


def rkp_hamiltonian(st: PlanarState) -> np.ndarray:
    """H = |p|^2/2 - 1/|q| + (p1 q2 - p2 q1)."""
    q, p = _arr(st.q), _arr(st.p)
    _check_q(q)
    return 0.5 * _dot(p, p) - 1.0 / np.linalg.norm(q, axis=-1) + (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0])


def rkp_hamiltonian_completed(st: PlanarState) -> np.ndarray:
    """Completed-square form 1/2((p1+q2)^2 + (p2-q1)^2) + U(q)."""
    q, p = _arr(st.q), _arr(st.p)
    return 0.5 * ((p[..., 0] + q[..., 1]) ** 2 + (p[..., 1] - q[..., 0]) ** 2) + effective_potential(q)


def kepler_energy(st: PlanarState) -> np.ndarray:
    """K = |p|^2/2 - 1/|q|."""
    q, p = _arr(st.q), _arr(st.p)
    _check_q(q)
    return 0.5 * _dot(p, p) - 1.0 / np.linalg.norm(q, axis=-1)


def hill_bounded_radius(c: float, tol: float = 1e-12) -> float:
    """Outer radius of the bounded Hill component: smallest root of U(rho) = c.

    U is increasing on (0, 1) with U(1) = -3/2, so the root is bracketed by
    (0, 1) for every ``c < -3/2``.
    """
    if not c < CRITICAL_VALUE:
        raise DomainError(f"energy {c} is not below the critical value -3/2")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid == 0.0 or -1.0 / mid - 0.5 * mid * mid < c:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Ligon-Schaaf


def ligon_schaaf_frame(st: PlanarState):
    """Return (phi, u, v) of the Ligon-Schaaf construction."""
    q, p = _arr(st.q), _arr(st.p)
    _check_q(q)
    k = kepler_energy(st)
    if np.any(k >= 0.0):
        raise DomainError("Ligon-Schaaf needs negative Kepler energy")
    nu = np.sqrt(-2.0 * k)
    nq = np.linalg.norm(q, axis=-1)
    qp = _dot(q, p)
    phi = -nu * qp
    u = np.concatenate([(nu * nq)[..., None] * p, (_dot(p, p) * nq - 1.0)[..., None]], axis=-1)
    v = np.concatenate([-q / nq[..., None] + qp[..., None] * p, phi[..., None]], axis=-1)
    return phi, u, v


def ligon_schaaf(st: PlanarState) -> SphereCotangent:
    """Map negative-energy Kepler states to T*S^2 in R^3 x R^3."""
    phi, u, v = ligon_schaaf_frame(st)
    nu = np.sqrt(-2.0 * kepler_energy(st))
    cphi, sphi = np.cos(phi)[..., None], np.sin(phi)[..., None]
    r = cphi * u + sphi * v
    s = (-sphi * u + cphi * v) / nu[..., None]
    return SphereCotangent(r, s)


# ---------------------------------------------------------------------------
# stereographic coordinates (Moser switch: x is momentum-like, y position-like)


def stereo_project(st: StereoState) -> SphereCotangent:
    x, y = _arr(st.x), _arr(st.y)
    n2 = _dot(x, x)
    xy = _dot(x, y)
    s12 = (0.5 * (n2 + 1.0))[..., None] * y - xy[..., None] * x
    r12 = 2.0 * x / (n2 + 1.0)[..., None]
    r3 = (n2 - 1.0) / (n2 + 1.0)
    return SphereCotangent(
        np.concatenate([r12, r3[..., None]], axis=-1),
        np.concatenate([s12, xy[..., None]], axis=-1),
    )


def stereo_unproject(rs: SphereCotangent) -> StereoState:
    r, s = _arr(rs.r), _arr(rs.s)
    if np.any(r[..., 2] == 1.0):
        raise CollisionError("the north pole has no stereographic image")
    one_m = (1.0 - r[..., 2])[..., None]
    x = r[..., :2] / one_m
    y = one_m * (s[..., :2] + s[..., 2:3] * x)
    return StereoState(x, y)


# ---------------------------------------------------------------------------
# Levi-Civita:  x = w / conj(z),  y = 2 z^2


def _c(v):
    return v[..., 0] + 1j * v[..., 1]


def _r(v):
    return np.stack([v.real, v.imag], axis=-1)


def levi_civita(lc: LCState) -> StereoState:
    z, w = _c(_arr(lc.z)), _c(_arr(lc.w))
    if np.any(z == 0):
        raise DomainError("x = w / conj(z) is undefined at z = 0")
    return StereoState(_r(w / np.conj(z)), _r(2.0 * z * z))


def lc_inverse(st: StereoState, branch: int = 1) -> LCState:
    """Preimage under the Levi-Civita map; ``branch`` in {+1, -1} picks the sign of z."""
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    x, y = _c(_arr(st.x)), _c(_arr(st.y))
    if np.any(y == 0):
        raise DomainError("y = 0 has no Levi-Civita preimage with z != 0")
    z = branch * np.sqrt(y / 2.0)
    return LCState(_r(z), _r(x * np.conj(z)))


def momentum_swap(lc: LCState) -> LCState:
    """(z1, z2, w1, w2) -> (z2, z1, w2, w1): canonical, preserves a, negates b."""
    z, w = _arr(lc.z), _arr(lc.w)
    return LCState(z[..., ::-1], w[..., ::-1])


def surface_invariants(lc: LCState):
    """(a, b) = (|w|^2 + |z|^2, w1 z2 - z1 w2)."""
    z, w = _arr(lc.z), _arr(lc.w)
    return _dot(z, z) + _dot(w, w), w[..., 0] * z[..., 1] - z[..., 0] * w[..., 1]


def pullback_hamiltonian(lc: LCState) -> np.ndarray:
    """-1/(2 a^2) + 2 b."""
    a, b = surface_invariants(lc)
    if np.any(a == 0.0):
        raise DomainError("the origin is not in the regularized phase space")
    return -0.5 / a**2 + 2.0 * b


def F_level(lc: LCState, c) -> np.ndarray:
    """F = -1 + 4 b a^2 - 2 c a^2."""
    a, b = surface_invariants(lc)
    return -1.0 + 4.0 * b * a**2 - 2.0 * c * a**2


def _resolve_angular_sign() -> int:
    # H = Delaunay + sigma (r1 s2 - r2 s1) on one sample with no symmetry
    st = PlanarState(np.array([0.6, 0.3]), np.array([0.2, -0.5]))
    rs = ligon_schaaf(st)
    h = float(rkp_hamiltonian(st))
    delaunay = -0.5 / float(_dot(rs.s, rs.s))
    ang = float(_cross(rs.r[:2], rs.s[:2]))
    for sigma in (1, -1):
        if abs(delaunay + sigma * ang - h) < 1e-12:
            return sigma
    raise RuntimeError("no angular sign reproduces the rotating Kepler energy")


ANGULAR_SIGN = _resolve_angular_sign()


def compose_embedding(st: PlanarState, branch: int = 1) -> LCState:
    """Ligon-Schaaf, stereographic chart, Levi-Civita preimage, sign correction.

    The result lies on ``F(., H(q, p)) = 0``.
    """
    lc = lc_inverse(stereo_unproject(ligon_schaaf(st)), branch)
    if ANGULAR_SIGN == -1:
        lc = momentum_swap(lc)
    return lc


# ---------------------------------------------------------------------------
# symplecticity


def jacobian_fd(f: Callable[[np.ndarray], np.ndarray], x, h: float) -> np.ndarray:
    """Central-difference Jacobian of a map R^n -> R^m at a single point."""
    x = _arr(x)
    cols = []
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((f(x + e) - f(x - e)) / (2.0 * h))
    return np.stack(cols, axis=-1)


def _omega(n):
    o = np.zeros((2 * n, 2 * n))
    o[:n, n:] = np.eye(n)
    o[n:, :n] = -np.eye(n)
    return o


def _ls_flat(v):
    rs = ligon_schaaf(PlanarState(v[:2], v[2:]))
    return np.concatenate([rs.r, rs.s])


def _stereo_flat(v):
    rs = stereo_project(StereoState(v[:2], v[2:]))
    return np.concatenate([rs.r, rs.s])


def _lc_flat(v):
    st = levi_civita(LCState(v[:2], v[2:]))
    return np.concatenate([st.x, st.y])


def _composed_flat(v):
    return compose_embedding(PlanarState(v[:2], v[2:])).as_array()


_MAPS = {
    "identity": (lambda v: np.array(v, dtype=float), 2, 2),
    "LS": (_ls_flat, 2, 3),
    "stereo": (_stereo_flat, 2, 3),
    "LC": (_lc_flat, 2, 2),
    "composed": (_composed_flat, 2, 2),
}

# pullback of the target's sum dq_i ^ dp_i equals this multiple of the source's
CONFORMAL_FACTORS = {"identity": 1.0, "LS": 1.0, "stereo": 1.0, "LC": -4.0, "composed": -0.25}


def symplecticity_defect(map_id: str, point, h: float = 1e-6) -> float:
    """max |J^T Omega_target J - k Omega_source| with J by central differences.

    ``k`` is ``CONFORMAL_FACTORS[map_id]``.  For the Ligon-Schaaf map the
    target form is sum dr_i ^ ds_i on R^6, restricted to the image.
    """
    f, n_src, n_tgt = _MAPS[map_id]
    J = jacobian_fd(f, point, h)
    pull = J.T @ _omega(n_tgt) @ J
    return float(np.max(np.abs(pull - CONFORMAL_FACTORS[map_id] * _omega(n_src))))


# ---------------------------------------------------------------------------
# seeded samplers


def sample_negative_energy(n: int, rng: np.random.Generator, r_min=0.3, r_max=2.0, p_max=2.0, k_max=0.0):
    """q uniform in the annulus r_min <= |q| <= r_max, p uniform in |p| <= p_max, kept if K < k_max."""
    qs, ps = [], []
    have = 0
    while have < n:
        m = 2 * (n - have) + 16
        rho = np.sqrt(rng.uniform(r_min**2, r_max**2, m))
        th = rng.uniform(0.0, 2 * np.pi, m)
        q = np.stack([rho * np.cos(th), rho * np.sin(th)], axis=-1)
        pr = p_max * np.sqrt(rng.uniform(0.0, 1.0, m))
        pt = rng.uniform(0.0, 2 * np.pi, m)
        p = np.stack([pr * np.cos(pt), pr * np.sin(pt)], axis=-1)
        keep = kepler_energy(PlanarState(q, p)) < k_max
        qs.append(q[keep])
        ps.append(p[keep])
        have += int(keep.sum())
    return PlanarState(np.concatenate(qs)[:n], np.concatenate(ps)[:n])


def sample_bounded_component(n: int, rng: np.random.Generator, c_max: float = CRITICAL_VALUE):
    """States with H < c_max and q in the bounded Hill component (|q| < 1)."""
    qs, ps = [], []
    have = 0
    while have < n:
        m = 4 * (n - have) + 16
        rho = np.sqrt(rng.uniform(0.0, 1.0, m))
        th = rng.uniform(0.0, 2 * np.pi, m)
        q = np.stack([rho * np.cos(th), rho * np.sin(th)], axis=-1)
        # rotating-frame velocity p - (-q2, q1), small enough to stay below c_max
        vr = 2.0 * np.sqrt(rng.uniform(0.0, 1.0, m))
        vt = rng.uniform(0.0, 2 * np.pi, m)
        p = np.stack([vr * np.cos(vt) - q[:, 1], vr * np.sin(vt) + q[:, 0]], axis=-1)
        ok = rho > 1e-3
        st = PlanarState(q[ok], p[ok])
        keep = rkp_hamiltonian(st) < c_max
        qs.append(st.q[keep])
        ps.append(st.p[keep])
        have += int(keep.sum())
    return PlanarState(np.concatenate(qs)[:n], np.concatenate(ps)[:n])


# ---------------------------------------------------------------------------
# property suite


def ls_residuals(st: PlanarState) -> dict:
    """Per-sample residuals of the Ligon-Schaaf identities."""
    _, u, v = ligon_schaaf_frame(st)
    rs = ligon_schaaf(st)
    k = kepler_energy(st)
    nr = np.linalg.norm(rs.r, axis=-1)
    return {
        "norm_r": np.abs(nr - 1.0),
        "r_dot_s": np.abs(_dot(rs.r, rs.s)),
        "norm_u": np.abs(np.linalg.norm(u, axis=-1) - 1.0),
        "norm_v": np.abs(np.linalg.norm(v, axis=-1) - 1.0),
        "u_dot_v": np.abs(_dot(u, v)),
        "delaunay": np.abs(-0.5 / _dot(rs.s, rs.s) - k),
    }


def _lc_points(n, rng):
    z = rng.uniform(-1.0, 1.0, (n, 2))
    z = z[np.linalg.norm(z, axis=1) > 0.2]
    w = rng.uniform(-1.0, 1.0, (len(z), 2))
    return np.concatenate([z, w], axis=1)


SYMPLECTIC_K_MAX = -0.1


def symplecticity_suite(count: int, seed, h: float = 1e-6) -> dict:
    """Max defect at h and at h/2 for each map over seeded points.

    Ligon-Schaaf points keep K <= -0.1: as K -> 0 the map's scale
    1/sqrt(-2K) blows up and a fixed step h stops resolving it.
    """
    rng = np.random.default_rng(seed)
    neg = sample_negative_energy(count, rng, k_max=SYMPLECTIC_K_MAX)
    bnd = sample_bounded_component(count, rng)
    lc = _lc_points(2 * count, rng)[:count]
    stereo = rng.uniform(-1.5, 1.5, (count, 4))
    pts = {
        "LS": np.concatenate([neg.q, neg.p], axis=1),
        "stereo": stereo,
        "LC": lc,
        "composed": np.concatenate([bnd.q, bnd.p], axis=1),
    }
    out = {}
    for name, X in pts.items():
        d1 = max(symplecticity_defect(name, x, h) for x in X)
        d2 = max(symplecticity_defect(name, x, 0.5 * h) for x in X)
        out[name] = {"defect": d1, "defect_half_step": d2, "factor": CONFORMAL_FACTORS[name]}
    return out


def map_property_suite(count: int = 10_000, sym_count: int = 1000, seed=0, tol: float = 1e-9) -> dict:
    """Ligon-Schaaf identities, symplecticity, energy correspondence and the
    2-to-1 property on seeded samples; ``pass`` summarizes all of them."""
    rng = np.random.default_rng(seed)
    neg = sample_negative_energy(count, rng)
    ls = {k: float(np.max(v)) for k, v in ls_residuals(neg).items()}
    ls_max = max(ls.values())

    bnd = sample_bounded_component(count, rng)
    H = rkp_hamiltonian(bnd)
    lp = compose_embedding(bnd, 1)
    lm = compose_embedding(bnd, -1)
    f_p = np.abs(F_level(lp, H))
    f_m = np.abs(F_level(lm, H))
    antipodal = float(np.max(np.abs(lp.as_array() + lm.as_array())))
    a_p, b_p = surface_invariants(lp)

    sym = symplecticity_suite(sym_count, [seed, 1] if np.isscalar(seed) else seed)
    sym_ok = all(
        d["defect"] < 1e-6 and d["defect_half_step"] < 1e-6 and abs(d["defect"] - d["defect_half_step"]) < 1e-6
        for d in sym.values()
    )
    energy_max = float(max(f_p.max(), f_m.max()))
    return {
        "sigma": ANGULAR_SIGN,
        "samples": int(count),
        "ligon_schaaf": {**ls, "max": ls_max, "pass": ls_max < tol},
        "symplecticity": {**sym, "pass": sym_ok},
        "energy": {"max_abs_F": energy_max, "pass": energy_max < tol},
        "two_to_one": {
            "antipodal": antipodal,
            "max_a": float(a_p.max()),
            "max_2b_minus_a": float(np.max(2 * np.abs(b_p) - a_p)),
            "pass": bool(antipodal < 1e-12 and energy_max < tol and a_p.max() < 1.0),
        },
    }
