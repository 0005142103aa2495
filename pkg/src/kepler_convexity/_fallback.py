"""Pure NumPy implementations of the per-point kernels.

Each function mirrors one in ``_kernels.pyx`` and has the same signature and
return layout.  Only elementwise IEEE operations (+, -, *, /, sqrt) are used so
results do not depend on how a batch is chunked.
"""
import numpy as np

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 50
JACOBI_BIG = 1e150

# index pairs for the packed upper triangle of a symmetric 4x4 matrix
_PAIRS4 = [(i, j) for i in range(4) for j in range(i, 4)]


def jacobi_eigvalsh3(m):
    """Eigenvalues (ascending) of a batch of symmetric 3x3 matrices by cyclic Jacobi.

    Each matrix stops rotating once its off-diagonal part is below
    ``JACOBI_TOL`` times its largest entry, so a result never depends on the
    other members of the batch.

    Parameters
    ----------
    m : array (n, 3, 3)

    Returns
    -------
    array (n, 3)
    """
    a = np.array(m, dtype=np.float64, copy=True)
    n = a.shape[0]
    scale = np.abs(a).reshape(n, 9).max(axis=1)
    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.maximum(np.maximum(np.abs(a[:, 0, 1]), np.abs(a[:, 0, 2])), np.abs(a[:, 1, 2]))
        live = off > JACOBI_TOL * scale
        if not np.any(live):
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            apq = a[:, p, q]
            active = live & (apq != 0.0)
            if not np.any(active):
                continue
            app = a[:, p, p]
            aqq = a[:, q, q]
            with np.errstate(over="ignore"):
                theta = (aqq - app) / (2.0 * np.where(active, apq, 1.0))
            # theta^2 would overflow: t -> 1/(2 theta)
            big = np.abs(theta) > JACOBI_BIG
            th = np.where(big, 1.0, theta)
            t = np.where(th >= 0.0, 1.0, -1.0) / (np.abs(th) + np.sqrt(th * th + 1.0))
            t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
            t = np.where(active, t, 0.0)
            cs = 1.0 / np.sqrt(t * t + 1.0)
            sn = t * cs
            r = 3 - p - q
            arp = a[:, r, p].copy()
            arq = a[:, r, q].copy()
            a[:, p, p] = np.where(active, app - t * apq, app)
            a[:, q, q] = np.where(active, aqq + t * apq, aqq)
            a[:, p, q] = np.where(active, 0.0, apq)
            a[:, q, p] = a[:, p, q]
            a[:, r, p] = np.where(active, cs * arp - sn * arq, arp)
            a[:, p, r] = a[:, r, p]
            a[:, r, q] = np.where(active, sn * arp + cs * arq, arq)
            a[:, q, r] = a[:, r, q]
    ev = np.stack([a[:, 0, 0], a[:, 1, 1], a[:, 2, 2]], axis=1)
    return np.sort(ev, axis=1)


def _frame_conjugate(g, h):
    """M = V^T H V for the quaternionic frame V built from g.

    g : (n, 4); h : dict (i, j) -> (n,) for i <= j.
    """
    g1, g2, g3, g4 = g[:, 0], g[:, 1], g[:, 2], g[:, 3]
    frame = (
        (-g2, g1, g4, -g3),
        (-g3, -g4, g1, g2),
        (-g4, g3, -g2, g1),
    )

    def hij(i, j):
        return h[(i, j)] if i <= j else h[(j, i)]

    hv = []
    for v in frame:
        hv.append([hij(i, 0) * v[0] + hij(i, 1) * v[1] + hij(i, 2) * v[2] + hij(i, 3) * v[3] for i in range(4)])
    m = np.empty((g.shape[0], 3, 3))
    for a in range(3):
        for b in range(a, 3):
            val = frame[a][0] * hv[b][0] + frame[a][1] * hv[b][1] + frame[a][2] * hv[b][2] + frame[a][3] * hv[b][3]
            m[:, a, b] = val
            m[:, b, a] = val
    return m


def _det3(m):
    return (
        m[:, 0, 0] * (m[:, 1, 1] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 1])
        - m[:, 0, 1] * (m[:, 1, 0] * m[:, 2, 2] - m[:, 1, 2] * m[:, 2, 0])
        + m[:, 0, 2] * (m[:, 1, 0] * m[:, 2, 1] - m[:, 1, 1] * m[:, 2, 0])
    )


def _diagnostics(g, h):
    m = _frame_conjugate(g, h)
    gn2 = g[:, 0] * g[:, 0] + g[:, 1] * g[:, 1] + g[:, 2] * g[:, 2] + g[:, 3] * g[:, 3]
    det = _det3(m)
    safe = np.where(gn2 > 0.0, gn2, 1.0)
    eig = jacobi_eigvalsh3(m / safe[:, None, None])
    eig[gn2 == 0.0] = np.nan
    return det, eig, gn2


# ---------------------------------------------------------------------------
# rotating Kepler after Ligon-Schaaf + Levi-Civita:  F = -1 + (4b - 2c) a^2


def rkp_F(x, c):
    x = np.asarray(x, dtype=np.float64)
    z1, z2, w1, w2 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    a = z1 * z1 + z2 * z2 + w1 * w1 + w2 * w2
    b = w1 * z2 - z1 * w2
    return -1.0 + (4.0 * b - 2.0 * c) * (a * a)


def rkp_grad_hess(x, c):
    """Return (g, H) with grad F = a*g and H the packed 4x4 Hessian of F."""
    x = np.asarray(x, dtype=np.float64)
    z1, z2, w1, w2 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    a = z1 * z1 + z2 * z2 + w1 * w1 + w2 * w2
    b = w1 * z2 - z1 * w2
    s = 4.0 * b - 2.0 * c
    xs = (z1, z2, w1, w2)
    db = (-w2, w1, z2, -z1)
    g = np.stack([4.0 * a * db[i] + 4.0 * s * xs[i] for i in range(4)], axis=1)
    # Hessian of b: d2b/dz1dw2 = -1, d2b/dz2dw1 = +1
    bij = {(0, 3): -1.0, (1, 2): 1.0}
    h = {}
    for i, j in _PAIRS4:
        v = 16.0 * a * (xs[j] * db[i] + xs[i] * db[j]) + 8.0 * s * xs[i] * xs[j]
        if i == j:
            v = v + 4.0 * a * s
        if (i, j) in bij:
            v = v + 4.0 * a * a * bij[(i, j)]
        h[(i, j)] = v
    return g, h


def rkp_diagnostics(x, c):
    """Tangential-Hessian diagnostics on F's level sets.

    Returns (det, eig, gnorm2, fval): det of V^T Hess(F) V with the frame from
    g; eigenvalues (ascending) of that matrix divided by |g|^2; |g|^2; F.
    """
    g, h = rkp_grad_hess(x, c)
    det, eig, gn2 = _diagnostics(g, h)
    return det, eig, gn2, rkp_F(x, c)


def rkp_ray_roots(d, c, tol=1e-12, t_max=1.0):
    """Root t in (0, t_max] of F(t*d) = 0 by bisection; NaN without a sign change."""
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    lo = np.zeros(n)
    hi = np.full(n, float(t_max))
    ok = rkp_F(d * hi[:, None], c) > 0.0
    while True:
        live = ok & (hi - lo > tol)
        if not np.any(live):
            break
        mid = lo + 0.5 * (hi - lo)
        pos = rkp_F(d * mid[:, None], c) > 0.0
        hi = np.where(live & pos, mid, hi)
        lo = np.where(live & ~pos, mid, lo)
    t = lo + 0.5 * (hi - lo)
    t[~ok] = np.nan
    return t


# ---------------------------------------------------------------------------
# planar circular restricted three-body problem, Levi-Civita chart at a primary


def r3bp_setup(mu, primary):
    """(x_p, m_p, x_o, m_o): position/mass of the regularized and the other primary."""
    if primary == 0:
        return -mu, 1.0 - mu, 1.0 - mu, mu
    return 1.0 - mu, mu, -mu, 1.0 - mu


def r3bp_K(x, mu, c, primary):
    """K = |z|^2 (H_mu(Q, P) - c) with Q = x_p + 2 z^2, P = w / (4 conj z)."""
    x = np.asarray(x, dtype=np.float64)
    xp, mp, xo, mo = r3bp_setup(mu, primary)
    z1, z2, w1, w2 = x[:, 0], x[:, 1], x[:, 2], x[:, 3]
    r2 = z1 * z1 + z2 * z2
    q1 = xp + 2.0 * (z1 * z1 - z2 * z2)
    q2 = 4.0 * z1 * z2
    u1 = w1 * z1 - w2 * z2
    u2 = w1 * z2 + w2 * z1
    k = (w1 * w1 + w2 * w2) / 32.0 - 0.5 * mp + 0.25 * (u1 * q2 - u2 * q1) - c * r2
    if mo != 0.0:
        dx = q1 - xo
        k = k - mo * r2 / np.sqrt(dx * dx + q2 * q2)
    return k


def r3bp_ray_roots(d, mu, c, primary, t_max, n_steps, tol=1e-12):
    """First root of K(t*d) on (0, t_max]: march n_steps, then bisect."""
    d = np.asarray(d, dtype=np.float64)
    n = d.shape[0]
    dt = t_max / n_steps
    lo = np.zeros(n)
    hi = np.full(n, np.nan)
    found = np.zeros(n, dtype=bool)
    for k in range(1, n_steps + 1):
        t = k * dt
        todo = ~found
        if not np.any(todo):
            break
        v = r3bp_K(d[todo] * t, mu, c, primary)
        hit = np.zeros(n, dtype=bool)
        hit[todo] = v > 0.0
        hi[hit] = t
        lo[hit] = (k - 1) * dt
        found |= hit
    hi_f = np.where(found, hi, 1.0)
    lo_f = np.where(found, lo, 0.0)
    while True:
        live = found & (hi_f - lo_f > tol)
        if not np.any(live):
            break
        mid = lo_f + 0.5 * (hi_f - lo_f)
        pos = r3bp_K(d * mid[:, None], mu, c, primary) > 0.0
        hi_f = np.where(live & pos, mid, hi_f)
        lo_f = np.where(live & ~pos, mid, lo_f)
    t = lo_f + 0.5 * (hi_f - lo_f)
    t[~found] = np.nan
    return t


def fd_grad_hess(f, x, h):
    """Central-difference gradient and packed Hessian of a batched scalar f."""
    x = np.asarray(x, dtype=np.float64)
    f0 = f(x)
    fp = []
    fm = []
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        fp.append(f(x + e))
        fm.append(f(x - e))
    g = np.stack([(fp[i] - fm[i]) / (2.0 * h) for i in range(4)], axis=1)
    hh = {}
    for i, j in _PAIRS4:
        if i == j:
            hh[(i, i)] = (fp[i] - 2.0 * f0 + fm[i]) / (h * h)
        else:
            ei = np.zeros(4)
            ej = np.zeros(4)
            ei[i] = h
            ej[j] = h
            hh[(i, j)] = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4.0 * h * h)
    return g, hh


def fd_diagnostics(f, x, h):
    """Finite-difference tangential diagnostics of a batched scalar f.

    Returns (det, eig, gnorm2, halving): as rkp_diagnostics but with the frame
    built from grad f, plus the step-halving change
    max|H_h - H_{h/2}| / max|H_h| of the Hessian entries.
    """
    g, hh = fd_grad_hess(f, x, h)
    _, hh2 = fd_grad_hess(f, x, 0.5 * h)
    det, eig, gn2 = _diagnostics(g, hh)
    num = np.zeros(g.shape[0])
    den = np.zeros(g.shape[0])
    for key in _PAIRS4:
        num = np.maximum(num, np.abs(hh[key] - hh2[key]))
        den = np.maximum(den, np.abs(hh[key]))
    return det, eig, gn2, num / np.where(den > 0.0, den, 1.0)


def r3bp_fd_diagnostics(x, mu, c, primary, h):
    return fd_diagnostics(lambda y: r3bp_K(y, mu, c, primary), x, h)
