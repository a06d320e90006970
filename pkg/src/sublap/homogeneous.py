"""Homogeneous fields r^k * phi(theta) built from angular profiles, and the
even-in-y weighted-harmonic polynomial basis used as order oracles and
tangent-map candidates."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .angular import H0_SERIES, AngularProfile
from .extension import Field, Mesh
from .params import Parameters


@dataclass(frozen=True)
class SymmetricPoly:
    """Degree-k polynomial sum_m c_m x^(k-2m) y^(2m), even in y, in the
    kernel of div(y^a grad .) for the stored weight exponent."""

    k: int
    a: float
    coeffs: tuple

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for m, c in enumerate(self.coeffs):
            out += c * x ** (self.k - 2 * m) * y ** (2 * m)
        return float(out) if out.ndim == 0 else out

    def _d(self, x, y, nx, ny):
        """Exact partial derivative of order (nx, ny)."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        for m, c in enumerate(self.coeffs):
            px, py = self.k - 2 * m, 2 * m
            if px < nx or py < ny:
                continue
            f = 1.0
            for i in range(nx):
                f *= px - i
            for i in range(ny):
                f *= py - i
            out += c * f * x ** (px - nx) * y ** (py - ny)
        return float(out) if out.ndim == 0 else out

    def grad(self, x, y):
        return self._d(x, y, 1, 0), self._d(x, y, 0, 1)


def sB_basis(a: float, k: int) -> SymmetricPoly:
    """The degree-k even-in-y weighted-harmonic polynomial, leading
    coefficient 1 on x^k; one-dimensional per degree in the plane.

    Expanding div(y^a grad) on x^(k-2m) y^(2m) couples consecutive m only:
    c_{m+1} = -c_m (k-2m)(k-2m-1) / ((2m+2)(2m+1+a)).
    """
    if not -1 < a < 1:
        raise ValueError(f"weight exponent a={a} outside (-1, 1)")
    if k < 0 or k != int(k):
        raise ValueError("degree must be a nonnegative integer")
    k = int(k)
    coeffs = [1.0]
    for m in range(k // 2):
        num = (k - 2 * m) * (k - 2 * m - 1)
        den = (2 * m + 2) * (2 * m + 1 + a)
        coeffs.append(-coeffs[-1] * num / den)
    return SymmetricPoly(k=k, a=a, coeffs=tuple(coeffs))


class HomogeneousField:
    """Evaluator for u(x, y) = r^k phi(theta), homogeneous of degree k > 0.

    The angular factor comes from the profile's attached evaluator when it
    has one; otherwise cubic interpolation of the samples away from the
    endpoints and the theta^(1-a) flux series inside the closure zone.
    """

    def __init__(self, k: float, profile: AngularProfile):
        if k <= 0:
            raise ValueError("homogeneity degree must be positive")
        if profile.theta[0] != 0.0 or profile.theta[-1] != np.pi:
            raise ValueError("profile must cover [0, pi]")
        self.k = float(k)
        self.profile = profile
        if profile._eval_fn is not None:
            self._phi = lambda t: profile.eval(t)[0]
        else:
            spline = CubicSpline(profile.theta, profile.phi)
            a = profile.a
            phi0, w0 = profile.phi0, profile.w0
            phi_pi, w_pi = profile.phi_pi, profile.w_pi

            def phi_fn(t):
                t = np.asarray(t, dtype=float)
                out = spline(t)
                head = t < H0_SERIES
                tail = t > np.pi - H0_SERIES
                out = np.where(head, phi0 + w0 * t ** (1 - a) / (1 - a), out)
                tau = np.pi - t
                out = np.where(
                    tail, phi_pi - w_pi * tau ** (1 - a) / (1 - a), out)
                return out

            self._phi = phi_fn

    def eval(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r = np.hypot(x, y)
        theta = np.arctan2(y, x)
        out = r ** self.k * self._phi(theta)
        return float(out) if out.ndim == 0 else out

    def trace(self, x):
        """u on the boundary line: |x|^k times the endpoint values."""
        x = np.asarray(x, dtype=float)
        p = self.profile
        out = np.abs(x) ** self.k * np.where(x >= 0, p.phi0, p.phi_pi)
        return float(out) if out.ndim == 0 else out

    def sample(self, mesh: Mesh, params: Parameters | None = None) -> Field:
        X, Y = np.meshgrid(mesh.x, mesh.y)
        return Field(mesh, self.eval(X, Y), params=params)


def extend(profile: AngularProfile, k: float) -> HomogeneousField:
    return HomogeneousField(k, profile)


def la_residual(obj, x, y, a: float | None = None, h: float = 1e-3) -> float:
    """Max of |y^a (u_xx + u_yy) + a y^(a-1) u_y| over the sample points,
    the expanded weighted divergence; exact derivatives for polynomials,
    fourth-order differences otherwise."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("residual points must have y > 0")
    if isinstance(obj, SymmetricPoly):
        a = obj.a
        lap = obj._d(x, y, 2, 0) + obj._d(x, y, 0, 2)
        uy = obj._d(x, y, 0, 1)
    else:
        if a is None:
            a = obj.profile.a
        u = obj.eval

        def d2(f, axis):
            def sh(c):
                return (x + c * h, y) if axis == 0 else (x, y + c * h)
            return (-f(*sh(2)) + 16 * f(*sh(1)) - 30 * f(*sh(0))
                    + 16 * f(*sh(-1)) - f(*sh(-2))) / (12 * h * h)

        def d1y(f):
            return (-f(x, y + 2 * h) + 8 * f(x, y + h)
                    - 8 * f(x, y - h) + f(x, y - 2 * h)) / (12 * h)

        lap = d2(u, 0) + d2(u, 1)
        uy = d1y(u)
    res = np.abs(y ** a * lap + a * y ** (a - 1) * uy)
    return float(np.max(res))
