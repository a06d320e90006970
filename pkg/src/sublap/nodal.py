"""Trace nodal-set analysis: point location, vanishing orders, blow-ups.

Two independent order estimators are used throughout.  The primary one is
half the log-log slope of the boundary mass H(x0, u, r), which for a
k-homogeneous field is exactly k and, unlike pointwise quantities, is
immune to the constant-factor quadrature bias of the midpoint rule at
negative weight exponents.  The secondary one is a plateau read of the
frequency quotient N_q(r) on the small-radius half of the window.  Their
gap is reported as data, never asserted.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from .extension import Field
from .functionals import (DEFAULT_NTHETA, H_FLOOR, DegenerateMassError,
                          _check_radius, boundary_mass, frequency,
                          h1a_norm_sq, monneau, sphere_samples)
from .homogeneous import sB_basis
from .params import DerivedExponents, Parameters

ORDER_TOL = 0.1

# Placeholder parameter set for fields carrying none: with both couplings
# zero the potential term vanishes and N_q degenerates to the pure
# Dirichlet quotient, which is all an unmarked field can support.
_NO_POTENTIAL = Parameters(s=0.5, q=1.0, lambda_plus=0.0, lambda_minus=0.0)


@dataclass(frozen=True)
class NodalPoint:
    """A located trace zero, optionally with order and stratum attached."""

    x0: float
    kind: str  # crossing | tangential | interval-endpoint
    order: float | None = None
    order_gap: float | None = None
    stratum: str | None = None  # Regular | Singular(m) | Sublinear | Unclassified
    candidates: tuple[str, ...] = ()
    tangent_coefficient: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("crossing", "tangential", "interval-endpoint"):
            raise ValueError(f"unknown nodal point kind {self.kind!r}")


@dataclass(frozen=True)
class BlowupDiagnostics:
    """Raw material behind a vanishing-order estimate."""

    radii: np.ndarray = dc_field(repr=False)
    slopes: np.ndarray = dc_field(repr=False)  # per adjacent radius pair
    frequencies: np.ndarray = dc_field(repr=False)  # N_q(r)
    order_slope: float = float("nan")
    order_plateau: float = float("nan")
    gap: float = float("nan")
    alarms: tuple[str, ...] = ()


def default_window(fld: Field, x0: float) -> tuple[float, float]:
    """Radius window [8h, 0.5*dist(x0, outer boundary)].

    Below eight local mesh widths, interpolation noise dominates H; above
    half the distance to the artificial boundary, the functionals feel the
    truncation.
    """
    m = fld.mesh
    h = max(float(np.max(m.dx)), float(m.y[1] - m.y[0]))
    r_min = 8.0 * h
    dist = min(m.x[-1] - x0, x0 - m.x[0], m.y[-1])
    r_max = 0.5 * dist
    if r_min >= r_max:
        raise ValueError(
            f"no admissible radii about x0={x0}: window [{r_min}, {r_max}] "
            "is empty; refine the mesh or move inward")
    return r_min, r_max


def trace_nodal_points(fld: Field, margin: float | None = None,
                       ztol_rel: float = 1e-6) -> list[NodalPoint]:
    """Locate trace zeros: sign changes, tangential touches, zero intervals.

    Sign changes are refined by root bracketing on the interpolated trace.
    A run of three or more below-tolerance nodes is reported as a pair of
    interval endpoints -- a red alert, since a solution vanishing on an
    open trace set must vanish identically and the field under analysis is
    then numerical debris.
    """
    m = fld.mesh
    v = fld.values[0]
    x = m.x
    if margin is None:
        margin = 8.0 * float(np.max(m.dx))
    lo, hi = m.x[0] + margin, m.x[-1] - margin
    idx = np.nonzero((x >= lo) & (x <= hi))[0]
    if len(idx) < 3:
        raise ValueError("margin leaves fewer than three trace nodes")
    scale = float(np.max(np.abs(v)))
    points: list[NodalPoint] = []
    if scale == 0.0:
        return [NodalPoint(x0=float(x[idx[0]]), kind="interval-endpoint"),
                NodalPoint(x0=float(x[idx[-1]]), kind="interval-endpoint")]
    ztol = ztol_rel * scale
    z = np.abs(v) <= ztol

    i = idx[0]
    last = idx[-1]
    while i <= last:
        if z[i]:
            j = i
            while j + 1 <= last and z[j + 1]:
                j += 1
            run = j - i + 1
            left = v[i - 1] if i - 1 >= 0 else 0.0
            right = v[j + 1] if j + 1 <= len(v) - 1 else 0.0
            if run >= 3:
                points.append(NodalPoint(float(x[i]), "interval-endpoint"))
                points.append(NodalPoint(float(x[j]), "interval-endpoint"))
            elif left * right < 0:
                at = float(x[i]) if run == 1 else float(
                    x[i] if abs(v[i]) <= abs(v[j]) else x[j])
                points.append(NodalPoint(at, "crossing"))
            else:
                sub = np.abs(v[i:j + 1])
                points.append(NodalPoint(
                    float(x[i + int(np.argmin(sub))]), "tangential"))
            i = j + 1
            continue
        if i + 1 <= last and not z[i + 1] and v[i] * v[i + 1] < 0:
            root = brentq(lambda t: float(fld.eval(t, 0.0)),
                          float(x[i]), float(x[i + 1]), xtol=1e-14)
            points.append(NodalPoint(float(root), "crossing"))
        i += 1
    return points


def vanishing_order(fld: Field, x0: float,
                    r_window: tuple[float, float] | None = None,
                    p: Parameters | None = None, n_radii: int = 16,
                    ntheta: int = DEFAULT_NTHETA,
                    h_floor: float = H_FLOOR,
                    ) -> tuple[float, BlowupDiagnostics]:
    """Estimate the vanishing order of fld at the trace point x0.

    Primary estimator: least-squares slope of (1/2) log H against log r
    over the window.  Secondary: median frequency N_q over the lower half
    of the window.  Returns the primary, with the cross-estimator gap in
    the diagnostics.  Radii with boundary mass at the floor raise a
    unique-continuation alarm and are excluded from the fit.
    """
    if p is None:
        p = fld.params if fld.params is not None else _NO_POTENTIAL
    r_min, r_max = r_window if r_window is not None else default_window(fld, x0)
    radii = np.geomspace(r_min, r_max, n_radii)
    hs = np.array([boundary_mass(fld, x0, r, ntheta, p.n) for r in radii])
    alarms: list[str] = []
    keep = hs > h_floor
    if not keep.all():
        dead = ", ".join(f"{r:g}" for r in radii[~keep])
        alarms.append(
            "unique-continuation alarm: boundary mass at the numerical "
            f"floor for r in {{{dead}}}; a true solution vanishing on a "
            "ball vanishes identically")
    if keep.sum() < 2:
        diag = BlowupDiagnostics(radii=radii, slopes=np.array([]),
                                 frequencies=np.full(len(radii), np.nan),
                                 alarms=tuple(alarms))
        return float("nan"), diag

    logr = np.log(radii[keep])
    logh = np.log(hs[keep])
    slopes = 0.5 * np.diff(logh) / np.diff(logr)
    order_slope = 0.5 * float(np.polyfit(logr, logh, 1)[0])

    freqs = np.full(len(radii), np.nan)
    for i, r in enumerate(radii):
        if keep[i]:
            freqs[i] = frequency(fld, x0, r, p.q, p, ntheta, h_floor)
    mid = np.sqrt(r_min * r_max)
    lower = keep & (radii <= mid)
    order_plateau = float(np.median(freqs[lower])) if lower.any() else float("nan")

    gap = abs(order_slope - order_plateau)
    diag = BlowupDiagnostics(radii=radii, slopes=slopes, frequencies=freqs,
                             order_slope=order_slope,
                             order_plateau=order_plateau, gap=gap,
                             alarms=tuple(alarms))
    return order_slope, diag


def _trace_slope(fld: Field, x0: float) -> float:
    delta = 2.0 * float(np.max(fld.mesh.dx))
    return float(fld.eval(x0 + delta, 0.0) - fld.eval(x0 - delta, 0.0)) / (2 * delta)


def classify(fld: Field, x0: float, p: Parameters, d: DerivedExponents,
             tol: float = ORDER_TOL,
             r_window: tuple[float, float] | None = None,
             ntheta: int = DEFAULT_NTHETA) -> NodalPoint:
    """Assign a stratum to the trace zero at x0 from its measured order.

    Order within tol of k_q reads Sublinear; within tol of an integer
    m <= beta_q reads Regular (m = 1 with nonzero trace slope) or
    Singular(m).  When k_q itself sits within 2*tol of an integer the tie
    is genuine -- a pure degree-m blow-up is possible exactly at integer
    k_q -- so both candidates are reported.  Anything else is Unclassified,
    which at the continuum level is an empty verdict and thus flags
    discretization error.
    """
    order, diag = vanishing_order(fld, x0, r_window, p, ntheta=ntheta)

    delta = 2.0 * float(np.max(fld.mesh.dx))
    vl = float(fld.eval(x0 - delta, 0.0))
    vr = float(fld.eval(x0 + delta, 0.0))
    kind = "crossing" if vl * vr < 0 else "tangential"

    if not np.isfinite(order):
        return NodalPoint(x0=x0, kind=kind, order=order, order_gap=diag.gap,
                          stratum="Unclassified")

    slope_floor = 1e-6 * float(np.max(np.abs(fld.values[0]))) / fld.mesh.L
    targets: list[tuple[str, float, int | None]] = [("Sublinear", d.k_q, None)]
    for m in range(1, d.beta_q + 1):
        if m == 1 and abs(_trace_slope(fld, x0)) > slope_floor:
            label = "Regular"
        else:
            label = f"Singular({m})"
        targets.append((label, float(m), m))

    matched = [(abs(order - t), label, t, m) for label, t, m in targets
               if abs(order - t) <= tol]
    matched.sort(key=lambda row: row[0])
    labels = [label for _, label, _, _ in matched]

    # Near-integer k_q makes Sublinear/integer genuinely ambiguous: if one
    # side of the tie matched, surface the other as well.
    for label, t, m in targets:
        if m is not None and abs(d.k_q - m) < 2 * tol and labels:
            if label not in labels and "Sublinear" in labels:
                labels.append(label)
            if "Sublinear" not in labels and label in labels:
                labels.append("Sublinear")

    if not matched:
        return NodalPoint(x0=x0, kind=kind, order=order, order_gap=diag.gap,
                          stratum="Unclassified")

    stratum = matched[0][1]
    coeff = None
    m_best = matched[0][3]
    if m_best is not None:
        coeff, _ = tangent_map(fld, x0, m_best, r_window, ntheta=ntheta)
    return NodalPoint(x0=x0, kind=kind, order=order, order_gap=diag.gap,
                      stratum=stratum, candidates=tuple(labels),
                      tangent_coefficient=coeff)


def tangent_map(fld: Field, x0: float, k: int,
                r_window: tuple[float, float] | None = None,
                n_radii: int = 12, ntheta: int = DEFAULT_NTHETA,
                h_floor: float = H_FLOOR,
                ) -> tuple[float, tuple[np.ndarray, np.ndarray]]:
    """Fit c * p_k to fld about x0 and return c with its Monneau curve.

    The one-parameter least-squares fit lives on the smallest admissible
    half-circle in the weighted trace metric; the returned curve M(r)
    measures the rescaled mass of u - c*p_k, whose log-log slope estimates
    twice the remainder exponent.
    """
    r_min, r_max = r_window if r_window is not None else default_window(fld, x0)
    a = fld.mesh.a
    pk = sB_basis(a, k)
    s = sphere_samples(fld, x0, r_min, ntheta)
    xs = r_min * np.cos(s.theta)
    ys = r_min * np.sin(s.theta)
    pv = pk(xs, ys)
    denom = float(np.sum(s.weight * pv * pv))
    if denom <= h_floor:
        raise DegenerateMassError(
            f"tangent fit at r={r_min} is ill-conditioned: basis mass {denom}")
    c = float(np.sum(s.weight * s.u * pv)) / denom

    radii = np.geomspace(r_min, r_max, n_radii)
    scaled = lambda px, py: c * pk(px, py)
    mvals = np.array([monneau(fld, x0, scaled, r, float(k), ntheta)
                      for r in radii])
    return c, (radii, mvals)


def loglog_slope(radii: np.ndarray, values: np.ndarray,
                 floor: float = 1e-280) -> float:
    """Least-squares slope of log values against log radii."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > floor
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(radii[keep]), np.log(values[keep]), 1)[0])


def _analytic_mass(fld, x0: float, r: float, ntheta: int) -> float:
    # midpoint boundary mass for mesh-free analytic fields, matching the
    # quadrature of functionals.boundary_mass with n = 1
    a = fld.profile.a
    dth = np.pi / ntheta
    th = (np.arange(ntheta) + 0.5) * dth
    u = fld.eval(x0 + r * np.cos(th), r * np.sin(th))
    return float(np.sum((r * np.sin(th)) ** a * u ** 2) * r * dth) / r ** (1 + a)


def blowup_sequence(fld, x0: float, radii,
                    normalization: str = "H1a", k: float | None = None,
                    n_abscissae: int = 201, ntheta: int = DEFAULT_NTHETA,
                    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rescaled traces u(x0 + r*xi)/norm_r on fixed abscissae xi in [-1,1].

    normalization: "H" divides by the square root of the boundary mass,
    "H1a" by the scale-invariant half-ball norm (the choice for critical
    blow-ups), "power" by r^k (sub-critical, requires k).  Returns
    (abscissae, curves stacked per radius, pairwise sup-distance matrix).

    fld may be any object with an eval(x, y); mesh-backed fields get
    interior-radius checks, and the H1a norm (a bulk integral) is only
    available for them.  Mind that sampled fields with a sublinear trace
    cusp carry O(sqrt(dx/r)) interpolation error near the cusp, which the
    sup distance sees in full; analytic homogeneous fields are exact.
    """
    mesh = getattr(fld, "mesh", None)
    radii = np.asarray(list(radii), dtype=float)
    xi = np.linspace(-1.0, 1.0, n_abscissae)
    curves = np.empty((len(radii), n_abscissae))
    for i, r in enumerate(radii):
        if mesh is not None:
            _check_radius(fld, x0, r)
        elif r <= 0:
            raise ValueError("radius must be positive")
        if normalization == "H":
            nrm = np.sqrt(boundary_mass(fld, x0, r, ntheta) if mesh is not None
                          else _analytic_mass(fld, x0, r, ntheta))
        elif normalization == "H1a":
            if mesh is None:
                raise ValueError(
                    "H1a normalization needs a mesh-backed field (bulk integral)")
            nrm = np.sqrt(h1a_norm_sq(fld, x0, r, ntheta))
        elif normalization == "power":
            if k is None:
                raise ValueError("power normalization requires the exponent k")
            nrm = r ** k
        else:
            raise ValueError(f"unknown normalization {normalization!r}")
        if nrm <= np.sqrt(H_FLOOR):
            raise DegenerateMassError(
                f"normalization at r={r} is at the numerical floor")
        curves[i] = fld.eval(x0 + r * xi, np.zeros_like(xi)) / nrm
    dist = np.max(np.abs(curves[:, None, :] - curves[None, :, :]), axis=2)
    return xi, curves, dist
