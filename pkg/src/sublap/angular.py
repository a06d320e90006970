"""Angular profiles on the half-circle: the weighted Sturm-Liouville
problem -(sin^a t * phi')' = mu sin^a t * phi, its mixed and Dirichlet
eigenvalues, and the shooting constructions of homogeneous two-phase
profiles (odd about pi/2, or positive-negative-positive symmetric)."""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .params import DerivedExponents, Parameters

# Below this angular distance from {0, pi} adaptive stepping collapses for
# a > 0; the two-term series in the flux variable takes over.
H0_SERIES = 1e-4
IVP_TOL = 1e-12
PROFILE_NODES = 8193


class AngularError(RuntimeError):
    """Numerical failure in the angular solver (bracket, step underflow)."""


class OutOfRegimeError(ValueError):
    """Requested construction lies outside the constructive regime."""


def exponent_of(lambda_hat: float, a: float) -> float:
    """Positive root k of k(k+a) = lambda_hat."""
    return 0.5 * (-a + math.sqrt(a * a + 4.0 * lambda_hat))


def _series_from_end(a, mu, phi_e, w_e, t):
    """Two-term endpoint expansion: values at distance t from the singular
    endpoint given (phi, w) at the endpoint itself."""
    phi = phi_e + w_e * t ** (1 - a) / (1 - a) - mu * phi_e * t * t / (2 * (1 + a))
    w = w_e - mu * (phi_e * t ** (1 + a) / (1 + a) + w_e * t * t / (2 * (1 - a)))
    return phi, w


def _series_to_end(a, mu, phi_h, w_h, h):
    """Invert the expansion: endpoint values from (phi, w) at distance h.

    Fixed-point iteration; the map contracts like h^2 so a few sweeps reach
    machine precision at h = 1e-4.
    """
    phi_e, w_e = phi_h, w_h
    for _ in range(4):
        phi_e = phi_h - w_e * h ** (1 - a) / (1 - a) + mu * phi_e * h * h / (2 * (1 + a))
        w_e = w_h + mu * (phi_e * h ** (1 + a) / (1 + a) + w_e * h * h / (2 * (1 - a)))
    return phi_e, w_e


def _rhs(a, mu):
    def rhs(t, z):
        sa = math.sin(t) ** a
        return (z[1] / sa, -mu * sa * z[0])
    return rhs


def _integrate_dense(a, mu, t0, t1, phi0, w0, tol):
    sol = solve_ivp(_rhs(a, mu), (t0, t1), (phi0, w0), method="DOP853",
                    rtol=tol, atol=tol * 1e-2, dense_output=True)
    if not sol.success:
        raise AngularError(
            f"integration failed on [{t0:.6g}, {t1:.6g}]: {sol.message}")
    return sol


class AngularProfile:
    """Sampled (phi, w) pair on an angular interval, w = sin^a t * phi'.

    The flux w is the smooth unknown: it is continuous across glue points
    and carries the weighted endpoint conditions as plain values.  An
    attached evaluator gives off-grid values at integrator accuracy.
    """

    def __init__(self, theta, phi, w, mu, a, symmetry="none",
                 glue_points=(), eval_fn=None, amplitude=None):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        w = np.asarray(w, dtype=float)
        if not (theta.shape == phi.shape == w.shape) or theta.ndim != 1:
            raise ValueError("theta, phi, w must be 1-d arrays of equal length")
        if np.any(np.diff(theta) <= 0):
            raise ValueError("theta samples must be strictly increasing")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(w))):
            raise ValueError("profile values must be finite")
        if symmetry not in ("antisymmetric", "symmetric", "none"):
            raise ValueError(f"unknown symmetry tag {symmetry!r}")
        self.theta = theta
        self.phi = phi
        self.w = w
        self.mu = float(mu)
        self.a = float(a)
        self.symmetry = symmetry
        self.glue_points = tuple(glue_points)
        self._eval_fn = eval_fn
        self.amplitude = amplitude
        if symmetry == "antisymmetric":
            scale = np.max(np.abs(phi))
            if np.max(np.abs(phi + phi[::-1])) > 1e-10 * scale:
                raise ValueError("profile tagged antisymmetric is not odd")
        if symmetry == "symmetric":
            scale = np.max(np.abs(phi))
            if np.max(np.abs(phi - phi[::-1])) > 1e-10 * scale:
                raise ValueError("profile tagged symmetric is not even")

    @property
    def phi0(self):
        return float(self.phi[0]) if self.theta[0] == 0.0 else None

    @property
    def w0(self):
        return float(self.w[0]) if self.theta[0] == 0.0 else None

    @property
    def phi_pi(self):
        return float(self.phi[-1]) if self.theta[-1] == np.pi else None

    @property
    def w_pi(self):
        return float(self.w[-1]) if self.theta[-1] == np.pi else None

    def eval(self, t):
        """(phi, w) at angles t; evaluator if attached, else interpolation.
        Scalar in, scalars out; array in, arrays out."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t < self.theta[0] - 1e-12) or np.any(t > self.theta[-1] + 1e-12):
            raise ValueError("evaluation angle outside the profile interval")
        t = np.clip(t, self.theta[0], self.theta[-1])
        if self._eval_fn is not None:
            phi, w = self._eval_fn(t)
        else:
            phi = np.interp(t, self.theta, self.phi)
            w = np.interp(t, self.theta, self.w)
        if scalar:
            return float(phi[0]), float(w[0])
        return phi, w

    def residual(self, exclude_end=0.03, exclude_glue=0.01):
        """Max of |w' + mu sin^a t * phi| over stored nodes, with w' by
        fourth-order central differencing on the uniform grid.

        Nodes within exclude_end of the interval ends (where the weight's
        derivatives blow up and the series closure owns the accuracy) and
        within exclude_glue of glue points are masked.
        """
        th, dt = self.theta, self.theta[1] - self.theta[0]
        if np.max(np.abs(np.diff(th) - dt)) > 1e-9 * dt:
            raise ValueError("residual check needs a uniform theta grid")
        mask = (th > th[0] + exclude_end) & (th < th[-1] - exclude_end)
        for g in self.glue_points:
            mask &= np.abs(th - g) > exclude_glue
        mask[:2] = mask[-2:] = False
        if not np.any(mask):
            raise ValueError("residual mask excluded every node")
        idx = np.nonzero(mask)[0]
        wp = (-self.w[idx + 2] + 8 * self.w[idx + 1]
              - 8 * self.w[idx - 1] + self.w[idx - 2]) / (12 * dt)
        res = np.abs(wp + self.mu * np.sin(th[idx]) ** self.a * self.phi[idx])
        return float(np.max(res))

    def endpoint_defect(self, p: Parameters):
        """(defect at 0, defect at pi) of the two-phase flux conditions
        -w(0) = f(phi(0)) and w(pi) = f(phi(pi)), where the value at pi
        uses the inward weighted flux convention."""
        if self.phi0 is None or self.phi_pi is None:
            raise ValueError("profile does not span [0, pi]")

        def f(t):
            # branch on the sign first: at q=1 the powers are 0 and the
            # phases must select via the sign of t, not via 0^0 == 1
            if t > 0:
                return p.lambda_plus * t ** (p.q - 1)
            if t < 0:
                return -p.lambda_minus * (-t) ** (p.q - 1)
            return 0.0

        return (abs(-self.w0 - f(self.phi0)), abs(self.w_pi - f(self.phi_pi)))


def integrate_flux_system(a, mu, theta0, theta1, phi0, w0,
                          tol=IVP_TOL, h0=H0_SERIES, nodes=2049):
    """Integrate phi' = sin^-a t * w, w' = -mu sin^a t * phi on
    [theta0, theta1] from (phi0, w0); adaptive Runge-Kutta in the interior,
    series closure inside distance h0 of the singular endpoints {0, pi}."""
    if not -1 < a < 1:
        raise ValueError(f"weight exponent a={a} outside (-1, 1)")
    if not 0 <= theta0 < theta1 <= np.pi:
        raise ValueError("need 0 <= theta0 < theta1 <= pi")
    if 0 < theta0 < h0 or np.pi - h0 < theta1 < np.pi:
        bad = theta0 if 0 < theta0 < h0 else theta1
        raise AngularError(
            f"step size underflows at theta={bad:.3e}: start at the endpoint "
            f"itself or outside the series zone of width {h0:g}")

    if theta0 == 0.0:
        start = h0
        z0 = _series_from_end(a, mu, phi0, w0, h0)
        left_end = (phi0, w0)
    else:
        start = theta0
        z0 = (phi0, w0)
        left_end = None
    end = min(theta1, np.pi - h0)
    sol = _integrate_dense(a, mu, start, end, z0[0], z0[1], tol)

    right_end = None
    if theta1 == np.pi:
        ph, wh = sol.sol(np.pi - h0)
        v_e, what_e = _series_to_end(a, mu, ph, -wh, h0)
        right_end = (v_e, -what_e)

    def eval_fn(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        phi = np.empty_like(t)
        w = np.empty_like(t)
        core = (t >= start) & (t <= end)
        if np.any(core):
            z = sol.sol(t[core])
            phi[core], w[core] = z[0], z[1]
        head = t < start
        if np.any(head):
            phi[head], w[head] = _series_from_end(a, mu, *left_end, t[head])
        tail = t > end
        if np.any(tail):
            v, what = _series_from_end(a, mu, right_end[0], -right_end[1],
                                       np.pi - t[tail])
            phi[tail], w[tail] = v, -what
        return phi, w

    theta = np.linspace(theta0, theta1, nodes)
    phi, w = eval_fn(theta)
    return AngularProfile(theta, phi, w, mu, a, symmetry="none",
                          eval_fn=eval_fn)


def _shoot_mixed(a, mu, T, tol=IVP_TOL, h0=H0_SERIES):
    """phi(T) for the solution with phi(0)=1, w(0)=0."""
    z0 = _series_from_end(a, mu, 1.0, 0.0, h0)
    sol = _integrate_dense(a, mu, h0, T, z0[0], z0[1], tol)
    return float(sol.y[0, -1])


def _shoot_interior(a, mu, T, target, tol=IVP_TOL):
    """(phi, w) at angle target for the solution with phi(T)=0, w(T)=1."""
    sol = _integrate_dense(a, mu, T, target, 0.0, 1.0, tol)
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def _first_crossing(f, mu_max, steps, what):
    """Bracket the smallest positive root of f by linear scan, then refine.

    Both shooting maps are positive at mu=0 (the solution does not rotate),
    so the scan can anchor there and a root below the first grid step is
    still caught.
    """
    grid = np.linspace(mu_max / steps, mu_max, steps)
    prev_mu, prev_val = 0.0, 1.0
    for m in grid:
        val = f(m)
        if np.sign(val) != np.sign(prev_val):
            return prev_mu, m
        prev_mu, prev_val = m, val
    raise AngularError(
        f"no eigenvalue bracket for {what} while scanning mu in (0, {mu_max}]")


class EigenResult:
    """First eigenvalue of the weighted angular problem on an interval."""

    def __init__(self, lambda_hat, a, profile, interval, bc):
        self.lambda_hat = float(lambda_hat)
        self.a = float(a)
        self.k1 = exponent_of(lambda_hat, a)
        self.profile = profile
        self.interval = interval
        self.bc = bc
        if abs(self.k1 * (self.k1 + a) - self.lambda_hat) > 1e-12 * max(1.0, abs(lambda_hat)):
            raise AssertionError("exponent/eigenvalue round trip failed")

    def __repr__(self):
        lo, hi = self.interval
        return (f"EigenResult(lambda_hat={self.lambda_hat:.12g}, "
                f"k1={self.k1:.12g}, bc={self.bc!r}, "
                f"interval=({lo:.6g}, {hi:.6g}))")


def eigen_mixed(T, a, tol=1e-10, mu_max=60.0, steps=240):
    """Smallest mu with w(0)=0 and phi(T)=0: weighted-Neumann/Dirichlet."""
    if not 0 < T < np.pi:
        raise ValueError("T must lie in (0, pi)")

    def f(mu):
        return _shoot_mixed(a, mu, T)

    lo, hi = _first_crossing(f, mu_max, steps, f"mixed problem on (0, {T:g})")
    lam = brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    prof = integrate_flux_system(a, lam, 0.0, T, 1.0, 0.0)
    if np.min(prof.phi[:-1]) < -1e-8 * np.max(np.abs(prof.phi)):
        raise AngularError("mixed eigenfunction has an interior zero")
    return EigenResult(lam, a, prof, (0.0, T), "mixed")


def eigen_dirichlet(T, a, tol=1e-10, mu_max=60.0, steps=240):
    """Smallest mu with phi(T)=0=phi(pi-T); shoots from T with (0,1) to the
    even-symmetry target w(pi/2)=0."""
    if not 0 < T < np.pi / 2:
        raise ValueError("T must lie in (0, pi/2)")

    def g(mu):
        return _shoot_interior(a, mu, T, np.pi / 2)[1]

    lo, hi = _first_crossing(g, mu_max, steps,
                             f"Dirichlet problem on ({T:g}, {np.pi - T:g})")
    lam = brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps)
    prof = integrate_flux_system(a, lam, T, np.pi - T, 0.0, 1.0)
    interior = prof.phi[1:-1]
    if interior.size and np.min(interior) < -1e-8 * np.max(np.abs(prof.phi)):
        raise AngularError("Dirichlet eigenfunction changes sign")
    return EigenResult(lam, a, prof, (T, np.pi - T), "dirichlet")


def eigencurve(a, Ts, kind="dirichlet", tol=1e-10):
    """Sweep of the first eigenvalue over opening angles; returns columns
    {T, lambda_hat, k1} suitable for a delimited table."""
    Ts = np.asarray(Ts, dtype=float)
    lam = np.empty_like(Ts)
    for i, T in enumerate(Ts):
        r = eigen_dirichlet(T, a, tol) if kind == "dirichlet" else eigen_mixed(T, a, tol)
        lam[i] = r.lambda_hat
    k1 = np.array([exponent_of(v, a) for v in lam])
    return {"T": Ts, "lambda_hat": lam, "k1": k1}


def find_Tstar(a, k_q, tol=1e-12):
    """Opening angle T* at which the first Dirichlet exponent k1 equals k_q.

    Uses the midpoint-flux objective w(pi/2; mu_q, start (0,1) at T), which
    vanishes exactly when mu_q is the first Dirichlet eigenvalue of
    (T, pi-T); by the monotonicity of the eigenvalue in T this is the same
    root the nested bisection on k1(T) - k_q would find.
    """
    two_s = 1.0 - a
    if not two_s < k_q < 2.0:
        raise OutOfRegimeError(
            f"k_q={k_q:.6g} outside the attainable exponent window "
            f"({two_s:.6g}, 2): no Dirichlet opening angle matches it")
    mu = k_q * (k_q + a)

    def g(T):
        return _shoot_interior(a, mu, T, np.pi / 2)[1]

    t_hi = math.atan(math.sqrt(1.0 + a))  # degree-2 anchor, k1 = 2 here
    t_lo = 0.05
    while g(t_lo) >= 0:
        t_lo *= 0.5
        if t_lo < 1e-6:
            raise AngularError("no sign change while bracketing T*")
    if g(t_hi) <= 0:
        t_hi = min(2 * t_hi, np.pi / 2 - 1e-3)
        if g(t_hi) <= 0:
            raise AngularError("no sign change while bracketing T*")
    return float(brentq(g, t_lo, t_hi, xtol=tol,
                        rtol=4 * np.finfo(float).eps))


def nonlinear_amplitude(a, q, lambda_plus, w0_normalized):
    """Scaling c with c * psi meeting -w(0) = lambda_plus * phi(0)^{q-1}
    when psi(0) = 1; the ODE is linear, so the endpoint nonlinearity only
    fixes the amplitude: c = (lambda_plus / (-w0))^{1/(2-q)}."""
    del a
    if w0_normalized >= 0:
        raise OutOfRegimeError(
            f"normalized endpoint flux {w0_normalized:.6g} is not negative: "
            "the eigen-parameter sits at or above the mixed eigenvalue")
    if lambda_plus <= 0:
        raise ValueError("lambda_plus must be positive for the scaling")
    return (lambda_plus / (-w0_normalized)) ** (1.0 / (2.0 - q))


def _basis_pair(a, mu, t_end, tol=IVP_TOL):
    """Dense solutions from theta=0 with (1,0) and (0,1), up to t_end."""
    e1 = integrate_flux_system(a, mu, 0.0, t_end, 1.0, 0.0, tol=tol, nodes=33)
    e2 = integrate_flux_system(a, mu, 0.0, t_end, 0.0, 1.0, tol=tol, nodes=33)
    return e1, e2


def _combo_eval(e1, e2, beta, scale):
    def fn(t):
        p1, w1 = e1.eval(t)
        p2, w2 = e2.eval(t)
        return scale * (p1 + beta * p2), scale * (w1 + beta * w2)
    return fn


def _mirror_eval(base):
    def fn(t):
        p, w = base(np.pi - np.asarray(t, dtype=float))
        return p, -w
    return fn


def _neg(base):
    def fn(t):
        p, w = base(t)
        return -p, -w
    return fn


def _assemble_full(pieces, mu, a, symmetry, glue, amplitude,
                   nodes=PROFILE_NODES):
    """pieces: list of (lo, hi, eval_fn) covering [0, pi]."""
    theta = np.linspace(0.0, np.pi, nodes)
    phi = np.empty(nodes)
    w = np.empty(nodes)

    def eval_fn(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        p = np.empty_like(t)
        v = np.empty_like(t)
        done = np.zeros(t.shape, dtype=bool)
        for lo, hi, fn in pieces:
            m = ~done & (t >= lo) & (t <= hi)
            if np.any(m):
                p[m], v[m] = fn(t[m])
                done[m] = True
        if not np.all(done):
            raise ValueError("angle outside the assembled pieces")
        return p, v

    phi, w = eval_fn(theta)
    return AngularProfile(theta, phi, w, mu, a, symmetry=symmetry,
                          glue_points=glue, eval_fn=eval_fn,
                          amplitude=amplitude)


def _require_constructive(p: Parameters, d: DerivedExponents):
    if d.k_q >= 1.0:
        raise OutOfRegimeError(
            f"k_q={d.k_q:.6g} >= 1: the shooting construction requires the "
            "eigen-parameter below the half-circle mixed eigenvalue (k_q < 1)")


def build_antisymmetric(p: Parameters, d: DerivedExponents,
                        tol=IVP_TOL) -> AngularProfile:
    """Odd-about-pi/2 homogeneous profile: shoot the normalized solution on
    (0, pi/2) to a zero at pi/2, scale to meet the endpoint nonlinearity,
    extend by odd reflection.  Needs equal phase weights: the reflection
    maps the positive endpoint condition onto the negative one."""
    _require_constructive(p, d)
    if p.lambda_plus != p.lambda_minus:
        raise OutOfRegimeError(
            "antisymmetric profile forces lambda_plus == lambda_minus")
    a, mu = d.a, d.mu
    half = np.pi / 2
    e1, e2 = _basis_pair(a, mu, half, tol)
    p2_half = e2.eval(half)[0]
    beta = -float(e1.eval(half)[0] / p2_half)
    c = nonlinear_amplitude(a, p.q, p.lambda_plus, beta)
    base = _combo_eval(e1, e2, beta, c)
    prof = _assemble_full(
        [(0.0, half, base), (half, np.pi, _neg(_mirror_eval(base)))],
        mu, a, "antisymmetric", (half,), amplitude=c)
    if prof.phi0 <= 0:
        raise AngularError("antisymmetric profile lost positivity at 0")
    return prof


def build_symmetric(p: Parameters, d: DerivedExponents,
                    tol=IVP_TOL) -> AngularProfile:
    """Even profile with sign pattern (+, -, +): outer piece shot to zero at
    T*, middle piece the first Dirichlet eigenfunction at the same
    eigen-parameter (the defining property of T*), scaled so the flux w is
    continuous at the glue, then mirrored about pi/2."""
    _require_constructive(p, d)
    a, mu = d.a, d.mu
    t_star = find_Tstar(a, d.k_q)
    half = np.pi / 2
    e1, e2 = _basis_pair(a, mu, t_star, tol)
    p2_ts = e2.eval(t_star)[0]
    beta = -float(e1.eval(t_star)[0] / p2_ts)
    c = nonlinear_amplitude(a, p.q, p.lambda_plus, beta)
    outer = _combo_eval(e1, e2, beta, c)

    w_glue = float(outer(t_star)[1])
    mid_unit = integrate_flux_system(a, mu, t_star, half, 0.0, 1.0, tol=tol,
                                     nodes=33)

    def middle(t):
        ph, wv = mid_unit.eval(t)
        return w_glue * ph, w_glue * wv

    pieces = [(0.0, t_star, outer),
              (t_star, half, middle),
              (half, np.pi - t_star, _mirror_eval(middle)),
              (np.pi - t_star, np.pi, _mirror_eval(outer))]
    prof = _assemble_full(pieces, mu, a, "symmetric",
                          (t_star, half, np.pi - t_star), amplitude=c)

    th = prof.theta
    inner = (th > t_star + 0.02) & (th < np.pi - t_star - 0.02)
    outer_band = (th > 0.02) & (th < t_star - 0.02)
    if np.any(outer_band) and np.min(prof.phi[outer_band]) <= 0:
        raise AngularError("symmetric profile: outer piece lost positivity")
    if np.any(inner) and np.max(prof.phi[inner]) >= 0:
        raise AngularError("symmetric profile: middle piece is not negative")
    return prof


def glue_jumps(prof: AngularProfile, h=1e-6):
    """Flux discontinuities across each recorded glue point.

    The straddle difference w(g+h) - w(g-h) carries 2h*w'(g) from the
    smooth variation on top of the jump; one Richardson step with h and h/2
    cancels it, leaving the jump to O(h^2).
    """
    out = {}
    for g in prof.glue_points:
        def straddle(hh):
            return prof.eval(g + hh)[1] - prof.eval(g - hh)[1]

        out[g] = abs(2.0 * straddle(h / 2) - straddle(h))
    return out
