"""Radial functionals on half-disks: boundary mass, corrected energies,
frequency and Weiss-type quotients, and the Monneau comparison, together
with finite-difference checks of their derivative identities."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .extension import Field
from .params import Parameters, critical_constant

# Below this boundary mass the frequency quotient is meaningless; in the
# continuum a vanishing mass forces the whole solution to vanish, so a floor
# hit is a red-flag diagnostic rather than a value.
H_FLOOR = 1e-30

DEFAULT_NTHETA = 256


class DegenerateMassError(ArithmeticError):
    """Raised when the boundary mass sits at the numerical floor."""


def F_value(t, p: Parameters):
    """Two-phase potential lambda_plus*t_+^q + lambda_minus*t_-^q."""
    t = np.asarray(t, dtype=float)
    val = (p.lambda_plus * np.power(np.clip(t, 0.0, None), p.q)
           + p.lambda_minus * np.power(np.clip(-t, 0.0, None), p.q))
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class SphereSamples:
    """Midpoint samples on the half-circle of radius r about a trace point.

    The rule never evaluates at the endpoints, where the y^a factor is
    singular (a<0) or vanishing (a>0); weights sum to pi exactly.
    """

    x0: float
    r: float
    theta: np.ndarray
    dtheta: float
    u: np.ndarray
    du_r: np.ndarray
    weight: np.ndarray  # sin(theta)^a, midpoint values

    @property
    def covers(self) -> float:
        return float(self.dtheta * len(self.theta))


def _check_radius(fld: Field, x0: float, r: float) -> None:
    m = fld.mesh
    dx = float(np.max(m.dx))
    dy_top = float(m.y[-1] - m.y[-2])
    if r <= 0:
        raise ValueError("radius must be positive")
    if x0 - r < m.x[0] + dx or x0 + r > m.x[-1] - dx or r > m.y[-1] - dy_top:
        raise ValueError(
            f"radius {r} about x0={x0} leaves no one-cell interior margin")


def sphere_samples(fld: Field, x0: float, r: float,
                   ntheta: int = DEFAULT_NTHETA) -> SphereSamples:
    _check_radius(fld, x0, r)
    dtheta = np.pi / ntheta
    theta = (np.arange(ntheta) + 0.5) * dtheta
    ct, st = np.cos(theta), np.sin(theta)
    xs = x0 + r * ct
    ys = r * st
    u = fld.eval(xs, ys)
    ux, uy = fld.grad(xs, ys)
    du_r = ux * ct + uy * st
    a = fld.mesh.a
    return SphereSamples(x0=x0, r=r, theta=theta, dtheta=dtheta,
                         u=u, du_r=du_r, weight=st ** a)


def boundary_mass(fld: Field, x0: float, r: float,
                  ntheta: int = DEFAULT_NTHETA, n: int = 1) -> float:
    """H(x0, u, r) = r^-(n+a) * integral of y^a u^2 over the half-circle."""
    s = sphere_samples(fld, x0, r, ntheta)
    a = fld.mesh.a
    integral = float(np.sum((r * np.sin(s.theta)) ** a * s.u ** 2) * r * s.dtheta)
    return integral / r ** (n + a)


def _arc_antiderivative(t: np.ndarray, r: float) -> np.ndarray:
    inside = np.clip(t, -r, r)
    return 0.5 * (inside * np.sqrt(np.maximum(r * r - inside * inside, 0.0))
                  + r * r * np.arcsin(np.clip(inside / r, -1.0, 1.0)))


def _disk_rect_area(x1, x2, y1, y2, r: float):
    """Exact area of [x1,x2]x[y1,y2] inside the disk of radius r at the
    origin, assuming y1 >= 0; coordinates are relative to the center."""
    t1 = np.sqrt(np.maximum(r * r - y1 * y1, 0.0))
    t2 = np.sqrt(np.maximum(r * r - y2 * y2, 0.0))
    lo = np.maximum(x1, -t2)
    hi = np.minimum(x2, t2)
    area = (y2 - y1) * np.maximum(hi - lo, 0.0)
    for blo, bhi in ((-t1, -t2), (t2, t1)):
        lo = np.maximum(x1, blo)
        hi = np.minimum(x2, bhi)
        ok = hi > lo
        seg = (_arc_antiderivative(hi, r) - _arc_antiderivative(lo, r)
               - y1 * (hi - lo))
        area += np.where(ok, np.maximum(seg, 0.0), 0.0)
    return area


def _covered_fractions(mesh, x0: float, r: float) -> np.ndarray:
    """Per-cell covered fraction of the half-disk, exact on straddlers."""
    xl = mesh.x[:-1][None, :] - x0
    xr = mesh.x[1:][None, :] - x0
    yb = mesh.y[:-1][:, None]
    yt = mesh.y[1:][:, None]

    dxn = np.maximum(np.maximum(xl, -xr), 0.0)
    dmin2 = dxn ** 2 + yb ** 2
    dmax2 = np.maximum(xl ** 2, xr ** 2) + yt ** 2

    frac = np.zeros((mesh.my, mesh.nx))
    frac[dmax2 <= r * r] = 1.0
    straddle = (dmin2 < r * r) & (dmax2 > r * r)
    if np.any(straddle):
        XL = np.broadcast_to(xl, frac.shape)[straddle]
        XR = np.broadcast_to(xr, frac.shape)[straddle]
        YB = np.broadcast_to(yb, frac.shape)[straddle]
        YT = np.broadcast_to(yt, frac.shape)[straddle]
        area = _disk_rect_area(XL, XR, YB, YT, r)
        frac[straddle] = area / ((XR - XL) * (YT - YB))
    return frac


def bulk_energy(fld: Field, x0: float, r: float, n: int = 1) -> float:
    """r^-(n+a-1) * integral of y^a |grad u|^2 over the half-disk, by
    cell-fraction clipping with the exact per-cell y^a mass and the exact
    cell average of the squared bilinear gradient."""
    _check_radius(fld, x0, r)
    m = fld.mesh
    v = fld.values
    dx = m.dx[None, :]
    dy = np.diff(m.y)[:, None]

    sxb = (v[:-1, 1:] - v[:-1, :-1]) / dx
    sxt = (v[1:, 1:] - v[1:, :-1]) / dx
    mean_ux2 = (sxb ** 2 + sxb * sxt + sxt ** 2) / 3.0
    syl = (v[1:, :-1] - v[:-1, :-1]) / dy
    syr = (v[1:, 1:] - v[:-1, 1:]) / dy
    mean_uy2 = (syl ** 2 + syl * syr + syr ** 2) / 3.0

    frac = _covered_fractions(m, x0, r)
    mass = frac * m.dx[None, :] * m.wa_edge[:, None]
    integral = float(np.sum(mass * (mean_ux2 + mean_uy2)))
    return integral / r ** (n + m.a - 1.0)


def trace_potential(fld: Field, x0: float, r: float, p: Parameters,
                    nsub: int = 4, n: int = 1) -> float:
    """r^-(n+a-1) * integral of the two-phase potential F(u) over the trace
    segment, composite midpoint on mesh subintervals."""
    _check_radius(fld, x0, r)
    m = fld.mesh
    lo, hi = x0 - r, x0 + r
    cuts = m.x[(m.x > lo) & (m.x < hi)]
    brk = np.concatenate([[lo], cuts, [hi]])
    widths = np.diff(brk)
    offs = (np.arange(nsub) + 0.5) / nsub
    xm = (brk[:-1][:, None] + widths[:, None] * offs[None, :]).ravel()
    wm = np.repeat(widths / nsub, nsub)
    um = np.interp(xm, m.x, fld.values[0])
    integral = float(np.sum(F_value(um, p) * wm))
    return integral / r ** (n + m.a - 1.0)


def energy(fld: Field, x0: float, r: float, t: float, p: Parameters,
           ntheta: int = DEFAULT_NTHETA, nsub: int = 4) -> float:
    """E_t = (bulk energy) - (t/q) * (trace potential)."""
    del ntheta
    return (bulk_energy(fld, x0, r, p.n)
            - (t / p.q) * trace_potential(fld, x0, r, p, nsub, p.n))


def frequency(fld: Field, x0: float, r: float, t: float, p: Parameters,
              ntheta: int = DEFAULT_NTHETA, h_floor: float = H_FLOOR) -> float:
    """Frequency quotient N_t = E_t / H; raises on a floor-level mass."""
    h = boundary_mass(fld, x0, r, ntheta, p.n)
    if h <= h_floor:
        raise DegenerateMassError(
            f"boundary mass {h} at r={r} is at the numerical floor")
    return energy(fld, x0, r, t, p, ntheta) / h


def weiss(fld: Field, x0: float, r: float, k: float, t: float, p: Parameters,
          ntheta: int = DEFAULT_NTHETA) -> float:
    """W_{k,t} = E_t / r^2k - k H / r^2k."""
    e = energy(fld, x0, r, t, p, ntheta)
    h = boundary_mass(fld, x0, r, ntheta, p.n)
    return (e - k * h) / r ** (2.0 * k)


def monneau(fld: Field, x0: float, poly, r: float, k: float,
            ntheta: int = DEFAULT_NTHETA, n: int = 1) -> float:
    """Comparison quotient: boundary mass of u - poly(.-x0), rescaled by
    r^2k; poly is any evaluator of (x, y) homogeneous of degree k."""
    s = sphere_samples(fld, x0, r, ntheta)
    a = fld.mesh.a
    xs = s.r * np.cos(s.theta)
    ys = s.r * np.sin(s.theta)
    diff = s.u - poly(xs, ys)
    integral = float(np.sum((r * np.sin(s.theta)) ** a * diff ** 2) * r * s.dtheta)
    return integral / r ** (n + a + 2.0 * k)


def h1a_norm_sq(fld: Field, x0: float, r: float,
                ntheta: int = DEFAULT_NTHETA, n: int = 1) -> float:
    """Scale-invariant half-ball norm squared: bulk energy plus boundary
    mass, the normalization used for critical blow-up sequences."""
    return bulk_energy(fld, x0, r, n) + boundary_mass(fld, x0, r, ntheta, n)


@dataclass
class FunctionalCurve:
    """Per-radius table of the radial functionals with derivative columns."""

    x0: float
    radii: np.ndarray
    columns: dict = dc_field(default_factory=dict)
    pairs: tuple = ()
    flags: list = dc_field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]

    @property
    def names(self) -> list:
        return list(self.columns.keys())

    def rows(self):
        cols = [self.columns[n] for n in self.names]
        for i in range(len(self.radii)):
            yield [c[i] for c in cols]


def weiss_column(k: float, t: float) -> str:
    return f"W_k{k:g}_t{t:g}"


def curve(fld: Field, x0: float, radii, p: Parameters, pairs=(),
          poly=None, poly_k: float | None = None,
          ntheta: int = DEFAULT_NTHETA, derivative_dr: float | None = None,
          h_floor: float = H_FLOOR) -> FunctionalCurve:
    """Evaluate the functional table at strictly increasing radii.

    Derivative columns come from centered differences: between neighboring
    rows by default, or at the stencil width derivative_dr if given.  With a
    single radius the derivative columns are flagged undefined (NaN).
    """
    radii = np.asarray(radii, dtype=float)
    if len(radii) == 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing and nonempty")
    nr = len(radii)
    H = np.empty(nr)
    D = np.empty(nr)
    F = np.empty(nr)
    flags = []
    for i, r in enumerate(radii):
        H[i] = boundary_mass(fld, x0, r, ntheta, p.n)
        D[i] = bulk_energy(fld, x0, r, p.n)
        F[i] = trace_potential(fld, x0, r, p, n=p.n)
        if H[i] <= h_floor:
            flags.append((i, "mass-floor"))

    E_q = D - F
    E_2 = D - (2.0 / p.q) * F
    with np.errstate(divide="ignore", invalid="ignore"):
        N_q = np.where(H > h_floor, E_q / H, np.nan)
        N_2 = np.where(H > h_floor, E_2 / H, np.nan)

    cols = {"r": radii, "H": H, "D": D, "F": F,
            "E_q": E_q, "E_2": E_2, "N_q": N_q, "N_2": N_2}

    for (k, t) in pairs:
        E_t = D - (t / p.q) * F
        cols[weiss_column(k, t)] = (E_t - k * H) / radii ** (2.0 * k)

    if poly is not None:
        if poly_k is None:
            raise ValueError("poly requires its homogeneity degree poly_k")
        cols["M"] = np.array(
            [monneau(fld, x0, poly, r, poly_k, ntheta, p.n) for r in radii])

    dHdr = np.full(nr, np.nan)
    if derivative_dr is not None:
        dr = float(derivative_dr)
        for i, r in enumerate(radii):
            dHdr[i] = (boundary_mass(fld, x0, r + dr, ntheta, p.n)
                       - boundary_mass(fld, x0, r - dr, ntheta, p.n)) / (2 * dr)
    elif nr >= 3:
        dHdr[1:-1] = (H[2:] - H[:-2]) / (radii[2:] - radii[:-2])

    defect = np.abs(dHdr - 2.0 * E_q / radii)
    scale = np.maximum(np.abs(E_q) / radii, 1e-12)
    cols["dHdr"] = dHdr
    cols["defect"] = defect
    cols["defect_rel"] = defect / scale

    return FunctionalCurve(x0=x0, radii=radii, columns=cols,
                           pairs=tuple(pairs), flags=flags)


def check_monotonicity(crv: FunctionalCurve, kind: str, k: float | None = None,
                       c_tilde: float | None = None, alpha: float | None = None,
                       tol: float = 1e-3) -> dict:
    """Largest decrease between consecutive radii of the monitored quantity.

    kind 'weiss_k2' watches the W_{k,2} column; 'almgren_perturbed' watches
    exp(c_tilde * r^alpha) * (N_q + 1).  Passes when the decrease stays
    within tol times the curve scale.
    """
    r = crv.radii
    if len(r) < 3:
        raise ValueError("monotonicity check needs at least 3 radii")
    if kind == "weiss_k2":
        if k is None:
            raise ValueError("weiss_k2 needs the homogeneity parameter k")
        vals = crv.column(weiss_column(k, 2.0))
    elif kind == "almgren_perturbed":
        if c_tilde is None or alpha is None:
            raise ValueError("almgren_perturbed needs (c_tilde, alpha)")
        vals = np.exp(c_tilde * r ** alpha) * (crv.column("N_q") + 1.0)
    else:
        raise ValueError(f"unknown monotonicity kind {kind!r}")
    drops = np.diff(vals)
    max_decrease = float(max(0.0, -np.min(drops))) if len(drops) else 0.0
    scale = float(np.max(np.abs(vals)))
    return {
        "kind": kind,
        "max_decrease": max_decrease,
        "scale": scale,
        "passed": bool(max_decrease <= tol * max(scale, 1e-300)),
        "tol": tol,
    }


def almgren_perturbed_constants(crv: FunctionalCurve, k_q: float, s: float,
                                q: float, n: int = 1,
                                delta_floor: float = 0.05) -> dict:
    """Diagnostic constants for the perturbed frequency quotient.

    delta is the observed gap between the critical order and the frequency
    at the smallest radius, alpha = delta/2, and c_tilde is fitted so that
    c_tilde * alpha * r^alpha bounds the measured sublinear correction
    G(r) = (2n - q(n-2s))/q * F / (E_q + H) along the curve.
    """
    r = crv.radii
    N_q = crv.column("N_q")
    delta = max(k_q - float(N_q[0]), delta_floor)
    alpha = delta / 2.0
    denom = crv.column("E_q") + crv.column("H")
    with np.errstate(divide="ignore", invalid="ignore"):
        G = (critical_constant(n, q, s) / q) * crv.column("F") / denom
    good = np.isfinite(G) & (denom > 0)
    c_tilde = float(np.max(G[good] / r[good] ** alpha)) / alpha if np.any(good) else 0.0
    return {"c_tilde": max(c_tilde, 0.0), "alpha": alpha, "delta": delta}
