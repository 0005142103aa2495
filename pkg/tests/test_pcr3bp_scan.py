import math

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from kepler_convexity import convexity_geom as cg
from kepler_convexity import kepler_maps as km
from kepler_convexity import pcr3bp_scan as ps
from kepler_convexity.errors import DegenerateFrameError, DomainError

SEED = 0x4B45504C


# -- planar problem ----------------------------------------------------------


def test_mu_zero_reduction():
    s = km.sample_negative_energy(2000, np.random.default_rng(1))
    np.testing.assert_allclose(ps.r3bp_hamiltonian(0.0, s.q, s.p), km.rkp_hamiltonian(s), rtol=0, atol=1e-12)


@given(st.floats(0.01, 0.99), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2))
def test_completed_square(mu, q1, q2, p1, p2):
    q, p = np.array([q1, q2]), np.array([p1, p2])
    E, M = np.array([-mu, 0]), np.array([1 - mu, 0])
    if min(np.linalg.norm(q - E), np.linalg.norm(q - M)) < 1e-3:
        return
    h = ps.r3bp_hamiltonian(mu, q, p)
    u = ps.r3bp_effective_potential(mu, q)
    assert h == pytest.approx(0.5 * ((p1 + q2) ** 2 + (p2 - q1) ** 2) + u, abs=1e-12 * max(1, abs(h)))


def test_effective_potential_values():
    assert ps.r3bp_effective_potential(0.5, [0.0, 0.0]) == -2.0
    rng = np.random.default_rng(2)
    for mu in (0.1, 0.3, 0.77):
        q = rng.uniform(-1.5, 1.5, (200, 2))
        qr = q * np.array([-1, 1])
        np.testing.assert_allclose(ps.r3bp_effective_potential(mu, q), ps.r3bp_effective_potential(1 - mu, qr), rtol=1e-13)


def test_primary_is_domain_error():
    with pytest.raises(DomainError):
        ps.r3bp_hamiltonian(0.3, [-0.3, 0.0], [0.0, 0.0])
    with pytest.raises(DomainError):
        ps.r3bp_effective_potential(0.3, [0.7, 0.0])
    with pytest.raises(DomainError):
        ps.r3bp_effective_potential(1.2, [0.1, 0.0])


def test_L1_symmetric_case():
    L = ps.lagrange_L1(0.5)
    assert abs(L.x) < 1e-12
    assert abs(L.critical_value + 2.0) < 1e-10


def test_L1_small_mu():
    assert abs(ps.lagrange_L1(1e-4).critical_value + 1.5) < 0.05


@pytest.mark.parametrize("mu", [0.01, 0.1, 0.3, 0.45])
def test_L1_symmetry_and_oracle(mu):
    a, b = ps.lagrange_L1(mu), ps.lagrange_L1(1 - mu)
    assert abs(a.critical_value - b.critical_value) < 1e-10
    assert abs(a.x + b.x) < 1e-10
    x = sympy.symbols("x")
    m = sympy.Rational(mu).limit_denominator(10**12)
    dU = (1 - m) / (x + m) ** 2 - m / (x - 1 + m) ** 2 - x
    root = sympy.nsolve(dU, x, (float(-mu + 0.05), float(1 - mu - 0.05)), solver="bisect", prec=30)
    assert a.x == pytest.approx(float(root), abs=1e-10)


def test_L1_domain():
    for mu in (0.0, 1.0, -0.1):
        with pytest.raises(DomainError):
            ps.lagrange_L1(mu)


# -- chart and K ---------------------------------------------------------------


def test_K_at_collision():
    spec = ps.RegularizedSurfaceSpec(0.0, -2.0)
    assert ps.regularized_hamiltonian(spec, [0.0, 0.0], [0.3, -1.1]) == pytest.approx(0.3**2 / 32 + 1.1**2 / 32 - 0.5)
    assert ps.regularized_hamiltonian(spec, [0.0, 0.0], [1.0, 0.0]) == pytest.approx(1 / 32 - 0.5)
    spec = ps.RegularizedSurfaceSpec(0.3, -2.5)
    m = spec.primary_mass
    assert ps.regularized_hamiltonian(spec, [0, 0], [4 * math.sqrt(m), 0]) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(DomainError):
        ps.regularized_hamiltonian(spec, [0, 0], [0, 0])


@pytest.mark.parametrize("mu,primary", [(0.0, "heavy"), (0.2, "heavy"), (0.2, "light"), (0.8, "heavy")])
def test_K_matches_hamiltonian(mu, primary):
    c = ps.first_critical_value(mu) - 0.5
    spec = ps.RegularizedSurfaceSpec(mu, c, primary)
    x = np.random.default_rng(3).uniform(-0.8, 0.8, (300, 4))
    QP = ps.chart_map(spec, x)
    want = np.sum(x[:, :2] ** 2, axis=1) * (ps.r3bp_hamiltonian(mu, QP[:, :2], QP[:, 2:]) - c)
    got = spec.K(x)
    np.testing.assert_allclose(got, want, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("mu", [0.0, 0.3, 0.9])
def test_chart_symplectic(mu):
    spec = ps.RegularizedSurfaceSpec(mu, ps.first_critical_value(mu) - 1)
    rng = np.random.default_rng(4)
    for x in rng.uniform(-1, 1, (200, 4)):
        if np.hypot(x[0], x[1]) < 0.2:
            continue
        assert ps.chart_symplecticity_defect(spec, x) < 1e-6
    with pytest.raises(DomainError):
        ps.chart_symplecticity_defect(spec, [0, 0, 1, 0])


def test_spec_validation():
    with pytest.raises(DomainError):
        ps.RegularizedSurfaceSpec(0.5, -1.9)  # above c1 = -2
    with pytest.raises(DomainError):
        ps.RegularizedSurfaceSpec(0.0, -2.0, "light")
    with pytest.raises(DomainError):
        ps.RegularizedSurfaceSpec(0.3, -3.0, chart="ls")
    with pytest.raises(DomainError):
        ps.RegularizedSurfaceSpec(0.3, -3.0, primary="middle")
    assert ps.RegularizedSurfaceSpec(0.3, -3.0).index == 0
    assert ps.RegularizedSurfaceSpec(0.7, -3.0).index == 1
    assert ps.RegularizedSurfaceSpec(0.7, -3.0, "light").index == 0


# -- sampling and diagnostics -------------------------------------------------------


@pytest.mark.parametrize("mu,frac", [(0.1, 0.5), (0.5, 0.99), (0.9, 0.9), (0.01, 0.99)])
def test_samples_on_shell(mu, frac):
    c1 = ps.first_critical_value(mu)
    spec = ps.RegularizedSurfaceSpec(mu, ps.scan_energy(c1, frac))
    smp = ps.sample_regularized_surface(spec, 2000, 9)
    assert np.max(np.abs(spec.K(smp.points))) < 1e-10
    assert len(smp.points) >= 0.95 * smp.requested
    # the four collision points are included
    z0 = smp.points[np.all(smp.points[:, :2] == 0, axis=1)]
    assert len(z0) == 4
    np.testing.assert_allclose(np.linalg.norm(z0[:, 2:], axis=1), 4 * math.sqrt(spec.primary_mass), rtol=1e-11)


def test_direct_axis_root_vs_composed_surface():
    # direct chart: K(z, 0) = -1/2 - c |z|^2, so |z| = 1/sqrt(-2c) = t^2 with t the
    # z-axis radius (-2c)^(-1/4) of the composed surface
    c = -2.0
    spec = ps.RegularizedSurfaceSpec(0.0, c)
    from kepler_convexity import kernels

    t_direct = kernels.get("r3bp_ray_roots")(np.array([[1.0, 0, 0, 0]]), 0.0, c, 0, 6.0, 600, 1e-12)[0]
    assert t_direct == pytest.approx(cg.axis_radius(c) ** 2, abs=1e-11)
    assert cg.axis_radius(c) == pytest.approx(1 / math.sqrt(2))


def test_sampling_deterministic():
    spec = ps.RegularizedSurfaceSpec(0.3, -2.4)
    a = ps.sample_regularized_surface(spec, 3000, [5, 1], jobs=1)
    b = ps.sample_regularized_surface(spec, 3000, [5, 1], jobs=4)
    assert a.points.tobytes() == b.points.tobytes()


def test_ls_chart_agrees_with_exact_geometry():
    c = -2.0
    spec = ps.RegularizedSurfaceSpec(0.0, c, chart="ls")
    pts = cg.sample_bounded_surface(c, 300, 2, include_special=False)
    dg = ps.tangential_diagnostics(spec, pts)
    det, eig, _, _ = cg.diagnose_points(pts, c)
    np.testing.assert_allclose(dg.eig, eig, rtol=1e-4)
    a = np.sum(pts**2, axis=1)
    np.testing.assert_allclose(dg.det, a**6 * det, rtol=1e-4)  # grad F = a g scales M by a^2


def test_diagnostics_antipodal_and_halving():
    spec = ps.RegularizedSurfaceSpec(0.2, -2.2)
    pts = ps.sample_regularized_surface(spec, 500, 3).points
    d1 = ps.tangential_diagnostics(spec, pts)
    d2 = ps.tangential_diagnostics(spec, -pts)
    np.testing.assert_allclose(d1.eig, d2.eig, rtol=1e-8, atol=1e-10)
    assert np.max(d1.halving) < ps.HALVING_TOL
    assert not d1.skipped.any()


def test_point_diagnostics_degenerate():
    spec = ps.RegularizedSurfaceSpec(0.0, -2.0)
    # origin of (z, w): grad K = 0 there
    with pytest.raises(DegenerateFrameError):
        ps.point_diagnostics(spec, np.zeros(4))
    mn, det = ps.point_diagnostics(spec, np.array([0.5, 0, 0, 0]))
    assert mn > 0 and det > 0


# -- scans -------------------------------------------------------------------


def test_scan_rows():
    tab = ps.scan_grid([0.2, 0.5, 0.8], [0.5, 0.95], 1500, SEED, jobs=2)
    assert len(tab.rows) == 6
    by = {(r.mu, r.fraction): r for r in tab.rows}
    assert by[(0.5, 0.5)].c_crit == -2.0
    for f in (0.5, 0.95):
        assert abs(by[(0.2, f)].c_crit - by[(0.8, f)].c_crit) < 1e-10
    for r in tab.rows:
        assert r.passed == (r.min_eig > 0)
        assert r.energy < r.c_crit
        assert r.max_abs_K < 1e-10
    assert tab.all_pass
    lines = tab.to_csv().splitlines()
    assert lines[0] == "mu,c_crit,energy,fraction,samples,skipped,min_eig,min_det,pass"
    assert len(lines) == 7


def test_scan_records_row_errors():
    tab = ps.scan_grid([1.5, 0.5], [0.5], 500, 1)
    assert tab.rows[0].error and not tab.rows[0].passed
    assert tab.rows[1].error is None and tab.rows[1].passed


def test_scan_energy():
    assert ps.scan_energy(-2.0, 0.5) == -3.5
    with pytest.raises(DomainError):
        ps.scan_energy(-2.0, 1.0)


def test_direct_lc_threshold():
    # non-convex only in a thin band just below -3/2; measured edge near -1.50302
    rep = ps.direct_lc_control([-1.5005, -1.501, -1.504, -1.52, -8.0], 20000, SEED)
    mins = [r.direct_min_eig for r in rep.rows]
    assert mins[0] < 0 and mins[1] < 0
    assert all(m > 0 for m in mins[2:])
    assert rep.composed_all_pass
    assert rep.direct_fails_somewhere


def test_control_domain():
    with pytest.raises(DomainError):
        ps.direct_lc_control([-1.4], 10, 0)
