# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-point kernels.  Signatures and outputs match ``_fallback``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, NAN

cnp.import_array()

cdef double JACOBI_TOL = 1e-12
cdef int JACOBI_MAX_SWEEPS = 50
cdef double JACOBI_BIG = 1e150


cdef inline void _sort3(double* e) noexcept nogil:
    cdef double t
    if e[0] > e[1]:
        t = e[0]; e[0] = e[1]; e[1] = t
    if e[1] > e[2]:
        t = e[1]; e[1] = e[2]; e[2] = t
    if e[0] > e[1]:
        t = e[0]; e[0] = e[1]; e[1] = t


cdef void _jacobi3(double a[3][3], double* ev) noexcept nogil:
    cdef int sweep, k, p, q, r, i, j
    cdef double scale = 0.0, off, apq, app, aqq, theta, t, cs, sn, arp, arq
    cdef int P[3]
    cdef int Q[3]
    P[0] = 0; Q[0] = 1
    P[1] = 0; Q[1] = 2
    P[2] = 1; Q[2] = 2
    for i in range(3):
        for j in range(3):
            if fabs(a[i][j]) > scale:
                scale = fabs(a[i][j])
    for sweep in range(JACOBI_MAX_SWEEPS):
        off = fabs(a[0][1])
        if fabs(a[0][2]) > off:
            off = fabs(a[0][2])
        if fabs(a[1][2]) > off:
            off = fabs(a[1][2])
        if not off > JACOBI_TOL * scale:
            break
        for k in range(3):
            p = P[k]
            q = Q[k]
            apq = a[p][q]
            if apq == 0.0:
                continue
            app = a[p][p]
            aqq = a[q][q]
            theta = (aqq - app) / (2.0 * apq)
            if fabs(theta) > JACOBI_BIG:
                t = 0.5 / theta
            elif theta >= 0.0:
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
            else:
                t = -1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
            cs = 1.0 / sqrt(t * t + 1.0)
            sn = t * cs
            r = 3 - p - q
            arp = a[r][p]
            arq = a[r][q]
            a[p][p] = app - t * apq
            a[q][q] = aqq + t * apq
            a[p][q] = 0.0
            a[q][p] = 0.0
            a[r][p] = cs * arp - sn * arq
            a[p][r] = a[r][p]
            a[r][q] = sn * arp + cs * arq
            a[q][r] = a[r][q]
    ev[0] = a[0][0]
    ev[1] = a[1][1]
    ev[2] = a[2][2]
    _sort3(ev)


cdef void _diagnostics(double* g, double h[4][4], double* det, double* ev, double* gn2) noexcept nogil:
    cdef double v[3][4]
    cdef double hv[3][4]
    cdef double m[3][3]
    cdef int a, b, i
    cdef double s
    v[0][0] = -g[1]; v[0][1] = g[0]; v[0][2] = g[3]; v[0][3] = -g[2]
    v[1][0] = -g[2]; v[1][1] = -g[3]; v[1][2] = g[0]; v[1][3] = g[1]
    v[2][0] = -g[3]; v[2][1] = g[2]; v[2][2] = -g[1]; v[2][3] = g[0]
    for b in range(3):
        for i in range(4):
            hv[b][i] = h[i][0] * v[b][0] + h[i][1] * v[b][1] + h[i][2] * v[b][2] + h[i][3] * v[b][3]
    for a in range(3):
        for b in range(a, 3):
            s = v[a][0] * hv[b][0] + v[a][1] * hv[b][1] + v[a][2] * hv[b][2] + v[a][3] * hv[b][3]
            m[a][b] = s
            m[b][a] = s
    gn2[0] = g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]
    det[0] = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
              - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
              + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    if gn2[0] == 0.0:
        ev[0] = NAN; ev[1] = NAN; ev[2] = NAN
        return
    for a in range(3):
        for b in range(3):
            m[a][b] = m[a][b] / gn2[0]
    _jacobi3(m, ev)


# --- rotating Kepler, F = -1 + (4b - 2c) a^2 -------------------------------

cdef inline double _rkp_F(double z1, double z2, double w1, double w2, double c) noexcept nogil:
    cdef double a = z1 * z1 + z2 * z2 + w1 * w1 + w2 * w2
    cdef double b = w1 * z2 - z1 * w2
    return -1.0 + (4.0 * b - 2.0 * c) * (a * a)


cdef void _rkp_gh(double* x, double c, double* g, double h[4][4]) noexcept nogil:
    cdef double z1 = x[0], z2 = x[1], w1 = x[2], w2 = x[3]
    cdef double a = z1 * z1 + z2 * z2 + w1 * w1 + w2 * w2
    cdef double b = w1 * z2 - z1 * w2
    cdef double s = 4.0 * b - 2.0 * c
    cdef double db[4]
    cdef int i, j
    cdef double val
    db[0] = -w2; db[1] = w1; db[2] = z2; db[3] = -z1
    for i in range(4):
        g[i] = 4.0 * a * db[i] + 4.0 * s * x[i]
    for i in range(4):
        for j in range(i, 4):
            val = 16.0 * a * (x[j] * db[i] + x[i] * db[j]) + 8.0 * s * x[i] * x[j]
            if i == j:
                val = val + 4.0 * a * s
            if i == 0 and j == 3:
                val = val + 4.0 * a * a * (-1.0)
            if i == 1 and j == 2:
                val = val + 4.0 * a * a * 1.0
            h[i][j] = val
            h[j][i] = val


def rkp_F(x, double c):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for k in range(n):
            o[k] = _rkp_F(xv[k, 0], xv[k, 1], xv[k, 2], xv[k, 3], c)
    return out


def rkp_diagnostics(x, double c):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k
    det = np.empty(n)
    eig = np.empty((n, 3))
    gn2 = np.empty(n)
    fval = np.empty(n)
    cdef double[::1] dv = det, gv = gn2, fv = fval
    cdef double[:, ::1] ev = eig
    cdef double g[4]
    cdef double h[4][4]
    with nogil:
        for k in range(n):
            _rkp_gh(&xv[k, 0], c, g, h)
            _diagnostics(g, h, &dv[k], &ev[k, 0], &gv[k])
            fv[k] = _rkp_F(xv[k, 0], xv[k, 1], xv[k, 2], xv[k, 3], c)
    return det, eig, gn2, fval


def rkp_ray_roots(d, double c, double tol=1e-12, double t_max=1.0):
    cdef double[:, ::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0], k
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double lo, hi, mid
    with nogil:
        for k in range(n):
            lo = 0.0
            hi = t_max
            if not _rkp_F(dv[k, 0] * hi, dv[k, 1] * hi, dv[k, 2] * hi, dv[k, 3] * hi, c) > 0.0:
                o[k] = NAN
                continue
            while hi - lo > tol:
                mid = lo + 0.5 * (hi - lo)
                if _rkp_F(dv[k, 0] * mid, dv[k, 1] * mid, dv[k, 2] * mid, dv[k, 3] * mid, c) > 0.0:
                    hi = mid
                else:
                    lo = mid
            o[k] = lo + 0.5 * (hi - lo)
    return out


# --- restricted three-body problem in a Levi-Civita chart -------------------

cdef inline double _r3bp_K(double z1, double z2, double w1, double w2, double xp, double mp,
                           double xo, double mo, double c) noexcept nogil:
    cdef double r2 = z1 * z1 + z2 * z2
    cdef double q1 = xp + 2.0 * (z1 * z1 - z2 * z2)
    cdef double q2 = 4.0 * z1 * z2
    cdef double u1 = w1 * z1 - w2 * z2
    cdef double u2 = w1 * z2 + w2 * z1
    cdef double k = (w1 * w1 + w2 * w2) / 32.0 - 0.5 * mp + 0.25 * (u1 * q2 - u2 * q1) - c * r2
    cdef double dx
    if mo != 0.0:
        dx = q1 - xo
        k = k - mo * r2 / sqrt(dx * dx + q2 * q2)
    return k


cdef inline void _setup(double mu, int primary, double* xp, double* mp, double* xo, double* mo) noexcept nogil:
    if primary == 0:
        xp[0] = -mu; mp[0] = 1.0 - mu; xo[0] = 1.0 - mu; mo[0] = mu
    else:
        xp[0] = 1.0 - mu; mp[0] = mu; xo[0] = -mu; mo[0] = 1.0 - mu


def r3bp_K(x, double mu, double c, int primary):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k
    cdef double xp, mp, xo, mo
    _setup(mu, primary, &xp, &mp, &xo, &mo)
    out = np.empty(n)
    cdef double[::1] o = out
    with nogil:
        for k in range(n):
            o[k] = _r3bp_K(xv[k, 0], xv[k, 1], xv[k, 2], xv[k, 3], xp, mp, xo, mo, c)
    return out


def r3bp_ray_roots(d, double mu, double c, int primary, double t_max, int n_steps, double tol=1e-12):
    cdef double[:, ::1] dv = np.ascontiguousarray(d, dtype=np.float64)
    cdef Py_ssize_t n = dv.shape[0], k
    cdef double xp, mp, xo, mo
    _setup(mu, primary, &xp, &mp, &xo, &mo)
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double dt = t_max / n_steps, lo, hi, mid, t
    cdef int s, found
    with nogil:
        for k in range(n):
            found = 0
            for s in range(1, n_steps + 1):
                t = s * dt
                if _r3bp_K(dv[k, 0] * t, dv[k, 1] * t, dv[k, 2] * t, dv[k, 3] * t, xp, mp, xo, mo, c) > 0.0:
                    found = 1
                    hi = t
                    lo = (s - 1) * dt
                    break
            if not found:
                o[k] = NAN
                continue
            while hi - lo > tol:
                mid = lo + 0.5 * (hi - lo)
                if _r3bp_K(dv[k, 0] * mid, dv[k, 1] * mid, dv[k, 2] * mid, dv[k, 3] * mid,
                           xp, mp, xo, mo, c) > 0.0:
                    hi = mid
                else:
                    lo = mid
            o[k] = lo + 0.5 * (hi - lo)
    return out


cdef inline double _Kat(double* x, int i, double si, int j, double sj, double xp, double mp,
                        double xo, double mo, double c) noexcept nogil:
    cdef double y[4]
    y[0] = x[0]; y[1] = x[1]; y[2] = x[2]; y[3] = x[3]
    if i >= 0:
        y[i] = y[i] + si
    if j >= 0:
        y[j] = y[j] + sj
    return _r3bp_K(y[0], y[1], y[2], y[3], xp, mp, xo, mo, c)


cdef void _fd_gh(double* x, double h, double xp, double mp, double xo, double mo, double c,
                 double* g, double H[4][4]) noexcept nogil:
    cdef double f0 = _Kat(x, -1, 0.0, -1, 0.0, xp, mp, xo, mo, c)
    cdef double fp[4]
    cdef double fm[4]
    cdef int i, j
    cdef double v
    for i in range(4):
        fp[i] = _Kat(x, i, h, -1, 0.0, xp, mp, xo, mo, c)
        fm[i] = _Kat(x, i, -h, -1, 0.0, xp, mp, xo, mo, c)
        g[i] = (fp[i] - fm[i]) / (2.0 * h)
    for i in range(4):
        H[i][i] = (fp[i] - 2.0 * f0 + fm[i]) / (h * h)
        for j in range(i + 1, 4):
            v = (_Kat(x, i, h, j, h, xp, mp, xo, mo, c) - _Kat(x, i, h, j, -h, xp, mp, xo, mo, c)
                 - _Kat(x, i, -h, j, h, xp, mp, xo, mo, c) + _Kat(x, i, -h, j, -h, xp, mp, xo, mo, c)) / (4.0 * h * h)
            H[i][j] = v
            H[j][i] = v


def r3bp_fd_diagnostics(x, double mu, double c, int primary, double h):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t n = xv.shape[0], k
    cdef double xp, mp, xo, mo
    _setup(mu, primary, &xp, &mp, &xo, &mo)
    det = np.empty(n)
    eig = np.empty((n, 3))
    gn2 = np.empty(n)
    halving = np.empty(n)
    cdef double[::1] dv = det, gv = gn2, hv = halving
    cdef double[:, ::1] ev = eig
    cdef double g[4]
    cdef double g2[4]
    cdef double H[4][4]
    cdef double H2[4][4]
    cdef int i, j
    cdef double num, den
    with nogil:
        for k in range(n):
            _fd_gh(&xv[k, 0], h, xp, mp, xo, mo, c, g, H)
            _fd_gh(&xv[k, 0], 0.5 * h, xp, mp, xo, mo, c, g2, H2)
            _diagnostics(g, H, &dv[k], &ev[k, 0], &gv[k])
            num = 0.0
            den = 0.0
            for i in range(4):
                for j in range(i, 4):
                    if fabs(H[i][j] - H2[i][j]) > num:
                        num = fabs(H[i][j] - H2[i][j])
                    if fabs(H[i][j]) > den:
                        den = fabs(H[i][j])
            hv[k] = num / den if den > 0.0 else num
    return det, eig, gn2, halving


def jacobi_eigvalsh3(m):
    cdef double[:, :, ::1] mv = np.ascontiguousarray(m, dtype=np.float64)
    cdef Py_ssize_t n = mv.shape[0], k
    out = np.empty((n, 3))
    cdef double[:, ::1] o = out
    cdef double a[3][3]
    cdef int i, j
    with nogil:
        for k in range(n):
            for i in range(3):
                for j in range(3):
                    a[i][j] = mv[k, i, j]
            _jacobi3(a, &o[k, 0])
    return out
