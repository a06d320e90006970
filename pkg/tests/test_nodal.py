from __future__ import annotations

import numpy as np
import pytest

from sublap.angular import build_antisymmetric
from sublap.extension import Field, build_mesh
from sublap.functionals import boundary_mass
from sublap.homogeneous import extend, sB_basis
from sublap.nodal import (blowup_sequence, classify, default_window,
                          loglog_slope, tangent_map, trace_nodal_points,
                          vanishing_order)
from sublap.params import Parameters, derive_exponents


def sampled(fn, a, nx=128, my=128, gamma=None, L=1.0, Y=1.0, params=None):
    mesh = build_mesh(L=L, Y=Y, nx=nx, my=my, gamma=gamma, a=a)
    X, Yg = np.meshgrid(mesh.x, mesh.y)
    return Field(mesh, fn(X, Yg), params=params)


def u1_sampled(nx=192, my=192):
    p = Parameters(s=0.25, q=1.0)
    d = derive_exponents(p)
    u1 = extend(build_antisymmetric(p, d), d.k_q)
    mesh = build_mesh(L=1.0, Y=1.0, nx=nx, my=my, a=d.a)
    return u1.sample(mesh, params=p), p, d


def synthetic_power(k, a, nx=128, my=128):
    def fn(X, Y):
        r = np.hypot(X, Y)
        th = np.arctan2(Y, X)
        return r ** k * (np.cos(th) + 2.0)
    return sampled(fn, a, nx=nx, my=my)


# --- point location ---------------------------------------------------------


def test_u1_single_crossing_at_origin():
    fld, _, _ = u1_sampled()
    pts = trace_nodal_points(fld)
    assert len(pts) == 1
    assert pts[0].kind == "crossing"
    assert abs(pts[0].x0) <= 1e-12


def test_crossing_refined_between_nodes():
    # trace x - c with c off-node: root found by bracketing, not snapping
    c = 0.31234567
    fld = sampled(lambda X, Y: X - c, a=0.0)
    pts = trace_nodal_points(fld)
    assert len(pts) == 1
    assert pts[0].kind == "crossing"
    assert pts[0].x0 == pytest.approx(c, abs=1e-10)


def test_p2_tangential_zero():
    a = 0.5
    p2 = sB_basis(a, 2)
    fld = sampled(lambda X, Y: p2(X, Y), a=a)
    pts = trace_nodal_points(fld)
    assert [pt.kind for pt in pts] == ["tangential"]
    assert pts[0].x0 == pytest.approx(0.0, abs=1e-12)


def test_positive_trace_no_points():
    fld = sampled(lambda X, Y: X * 0 + 1.0 + X ** 2, a=0.0)
    assert trace_nodal_points(fld) == []


def test_zero_interval_red_alert():
    def fn(X, Y):
        return np.maximum(np.abs(X) - 0.5, 0.0) * np.sign(X)
    fld = sampled(fn, a=0.0)
    pts = trace_nodal_points(fld)
    kinds = [pt.kind for pt in pts]
    assert kinds.count("interval-endpoint") == 2
    ends = sorted(pt.x0 for pt in pts if pt.kind == "interval-endpoint")
    assert ends[0] == pytest.approx(-0.5, abs=0.02)
    assert ends[1] == pytest.approx(0.5, abs=0.02)


def test_margin_excludes_boundary_zeros():
    fld = sampled(lambda X, Y: X - 0.97, a=0.0)
    assert trace_nodal_points(fld, margin=0.1) == []


# --- vanishing order --------------------------------------------------------


def test_order_of_linear_field():
    a = 0.3
    fld = sampled(lambda X, Y: X, a=a)
    order, diag = vanishing_order(fld, 0.0)
    assert order == pytest.approx(1.0, abs=0.05)
    assert diag.gap <= 0.1
    assert diag.alarms == ()


def test_order_of_p2():
    a = 0.5
    p2 = sB_basis(a, 2)
    fld = sampled(lambda X, Y: p2(X, Y), a=a)
    order, diag = vanishing_order(fld, 0.0)
    assert order == pytest.approx(2.0, abs=0.05)
    assert diag.gap <= 0.1


def test_order_of_u1():
    fld, p, d = u1_sampled()
    order, diag = vanishing_order(fld, 0.0, p=p)
    assert order == pytest.approx(0.5, abs=0.05)


def test_order_of_synthetic_16():
    fld = synthetic_power(1.6, a=0.2)
    order, _ = vanishing_order(fld, 0.0)
    assert order == pytest.approx(1.6, abs=0.05)


def test_order_estimator_window_override():
    fld = synthetic_power(1.0, a=0.0)
    order, diag = vanishing_order(fld, 0.0, r_window=(0.2, 0.4), n_radii=8)
    assert order == pytest.approx(1.0, abs=0.05)
    assert len(diag.radii) == 8
    assert diag.radii[0] == pytest.approx(0.2)
    assert diag.radii[-1] == pytest.approx(0.4)


def test_degenerate_field_raises_alarm():
    fld = sampled(lambda X, Y: 0.0 * X, a=0.0)
    order, diag = vanishing_order(fld, 0.0)
    assert np.isnan(order)
    assert any("unique-continuation" in s for s in diag.alarms)


def test_off_center_order():
    # shifted linear zero: order 1 at its own crossing
    fld = sampled(lambda X, Y: X - 0.3, a=0.0)
    order, _ = vanishing_order(fld, 0.3)
    assert order == pytest.approx(1.0, abs=0.05)


def test_default_window_shape_and_emptiness():
    fld = synthetic_power(1.0, a=0.0, nx=64, my=64)
    r_min, r_max = default_window(fld, 0.0)
    h = max(np.max(fld.mesh.dx), fld.mesh.y[1] - fld.mesh.y[0])
    assert r_min == pytest.approx(8 * h)
    assert r_max == pytest.approx(0.5)
    with pytest.raises(ValueError):
        default_window(fld, 0.9)


# --- classification ---------------------------------------------------------


def test_u1_classified_sublinear():
    fld, p, d = u1_sampled()
    pt = classify(fld, 0.0, p, d)
    assert pt.stratum == "Sublinear"
    assert pt.kind == "crossing"
    assert pt.order == pytest.approx(d.k_q, abs=0.05)
    assert pt.tangent_coefficient is None


def test_p1_classified_regular():
    # k_q = 18 leaves plenty of integer strata below beta_q = 17
    p = Parameters(s=0.9, q=1.9)
    d = derive_exponents(p)
    fld = sampled(lambda X, Y: X, a=d.a, nx=96, my=96)
    pt = classify(fld, 0.0, p, d)
    assert pt.stratum == "Regular"
    assert pt.kind == "crossing"
    assert pt.tangent_coefficient == pytest.approx(1.0, rel=1e-2)


def test_p2_classified_singular_2():
    p = Parameters(s=0.9, q=1.9)
    d = derive_exponents(p)
    p2 = sB_basis(d.a, 2)
    fld = sampled(lambda X, Y: p2(X, Y), a=d.a, nx=96, my=96)
    pt = classify(fld, 0.0, p, d)
    assert pt.stratum == "Singular(2)"
    assert pt.kind == "tangential"
    assert pt.tangent_coefficient == pytest.approx(1.0, rel=1e-2)


def test_near_integer_tie_reports_both():
    # k_q = 1.05 sits within 2*tol of the integer 1: a degree-1 blow-up is
    # genuinely possible there, so a measured order ~1 must list both.
    p = Parameters(s=0.525, q=1.0)
    d = derive_exponents(p)
    assert d.k_q == pytest.approx(1.05)
    fld = sampled(lambda X, Y: X, a=d.a, nx=96, my=96)
    pt = classify(fld, 0.0, p, d)
    assert set(pt.candidates) >= {"Regular", "Sublinear"}


def test_unclassifiable_order_flagged():
    # order 1.6 with beta_q = 0 and k_q = 0.5: matches nothing
    p = Parameters(s=0.25, q=1.0)
    d = derive_exponents(p)
    fld = synthetic_power(1.6, a=d.a)
    pt = classify(fld, 0.0, p, d)
    assert pt.stratum == "Unclassified"


# --- tangent maps -----------------------------------------------------------


def test_tangent_fit_recovers_coefficient():
    a = 0.4
    p2 = sB_basis(a, 2)
    fld = sampled(lambda X, Y: 3.0 * p2(X, Y), a=a, nx=256, my=256)
    c, (radii, mvals) = tangent_map(fld, 0.0, 2)
    assert c == pytest.approx(3.0, rel=1e-3)
    # the residual is interpolation noise; at the fit radius r = 8h the
    # relative resolution is mesh-independent, so compare against the mass
    # of the field itself in the same normalization
    signal = boundary_mass(fld, 0.0, radii[0]) / radii[0] ** 4
    assert mvals[0] <= 1e-4 * signal
    assert mvals[-1] <= 1e-6 * signal
    assert mvals[-1] < mvals[0]


def test_monneau_slope_reads_remainder_exponent():
    a = 0.25
    p1 = sB_basis(a, 1)
    p2 = sB_basis(a, 2)
    fld = sampled(lambda X, Y: p1(X, Y) + p2(X, Y), a=a, nx=192, my=192)
    c, (radii, mvals) = tangent_map(fld, 0.0, 1)
    assert c == pytest.approx(1.0, abs=2e-3)
    # u - p1 = p2 exactly, so M(r) ~ r^2: slope 2, i.e. delta = 1
    assert loglog_slope(radii, mvals) == pytest.approx(2.0, abs=0.1)


def test_tangent_fit_orthogonal_contamination():
    # fitting degree 1 in the presence of p2 leaves c untouched: the two
    # restrictions are orthogonal in the weighted circle metric
    a = -0.2
    p1 = sB_basis(a, 1)
    p2 = sB_basis(a, 2)
    fld = sampled(lambda X, Y: 2.0 * p1(X, Y) + 5.0 * p2(X, Y), a=a,
                  nx=192, my=192)
    c, _ = tangent_map(fld, 0.0, 1)
    assert c == pytest.approx(2.0, abs=2e-2)


# --- blow-up sequences ------------------------------------------------------


def u1_analytic():
    p = Parameters(s=0.25, q=1.0)
    d = derive_exponents(p)
    return extend(build_antisymmetric(p, d), d.k_q), p, d


def test_u1_blowup_power_normalization_coincides():
    u1, p, d = u1_analytic()
    radii = [0.4, 0.3, 0.2, 0.1]
    xi, curves, dist = blowup_sequence(u1, 0.0, radii, "power", k=d.k_q)
    assert dist.shape == (4, 4)
    assert np.allclose(np.diag(dist), 0.0)
    assert np.max(dist) <= 1e-10


def test_u1_blowup_h_normalization_coincides():
    from sublap.nodal import _analytic_mass

    u1, p, d = u1_analytic()
    xi, curves, dist = blowup_sequence(u1, 0.0, [0.4, 0.2, 0.1], "H")
    assert np.max(dist) <= 1e-10
    # the two normalizations differ by sqrt(H(r)/r^2k) exactly, and the
    # rescaled field carries unit mass under its own normalization
    _, pcurves, _ = blowup_sequence(u1, 0.0, [0.4], "power", k=d.k_q)
    factor = np.sqrt(_analytic_mass(u1, 0.0, 0.4, 256) / 0.4 ** (2 * d.k_q))
    assert np.allclose(curves[0] * factor, pcurves[0], atol=1e-10)


def test_u1_sampled_blowup_matches_away_from_cusp():
    # bilinear interpolation of the sqrt cusp costs O(sqrt(dx/r)) near 0;
    # away from it the sampled curves line up with the analytic identity
    fld, p, d = u1_sampled(nx=256, my=256)
    radii = [0.5, 0.4, 0.3]
    xi, curves, dist = blowup_sequence(fld, 0.0, radii, "power", k=d.k_q)
    mask = np.abs(xi) >= 0.2
    spread = np.max(np.abs(curves[:, mask] - curves[0:1, mask]))
    assert spread <= 2e-3
    assert np.max(dist) >= spread  # the full sup sees the cusp error


def test_perturbed_blowup_converges_linearly():
    a = 0.0
    p2 = sB_basis(a, 2)
    p3 = sB_basis(a, 3)
    fld = sampled(lambda X, Y: p2(X, Y) + 0.1 * p3(X, Y), a=a, nx=192, my=192)
    radii = [0.4, 0.2, 0.1]
    xi, curves, dist = blowup_sequence(fld, 0.0, radii, "power", k=2)
    # rescaled traces are xi^2 + 0.1 r xi^3: sup distance 0.1 |r - r'|
    assert dist[0, 2] == pytest.approx(0.1 * 0.3, abs=5e-3)
    assert dist[1, 2] == pytest.approx(0.1 * 0.1, abs=5e-3)
    assert dist[0, 1] > dist[1, 2]


def test_blowup_requires_interior_radii():
    fld = synthetic_power(1.0, a=0.0, nx=64, my=64)
    with pytest.raises(ValueError):
        blowup_sequence(fld, 0.0, [1.5], "power", k=1.0)
    with pytest.raises(ValueError):
        blowup_sequence(fld, 0.0, [0.4], "nonsense")
    with pytest.raises(ValueError):
        blowup_sequence(fld, 0.0, [0.4], "power")


# --- estimator soundness sweep ----------------------------------------------


@pytest.mark.parametrize("k", [0.5, 1.0, 1.6, 2.0])
def test_order_estimator_sound_for_exact_powers(k):
    fld = synthetic_power(k, a=0.2)
    order, _ = vanishing_order(fld, 0.0)
    assert order == pytest.approx(k, abs=0.05)
