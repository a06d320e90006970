"""Problem parameters and the derived exponents used throughout the package."""
from __future__ import annotations

import math
from dataclasses import dataclass

# Tolerance for deciding that k_q sits exactly on an integer; parameter files
# carry decimal literals, so exact float equality would be too brittle.
INTEGER_TOL = 1e-12


@dataclass(frozen=True)
class Parameters:
    """Data of the boundary-value problem.

    s is the fractional order, q the sublinearity exponent of the two-phase
    boundary term lambda_plus*u_+^(q-1) - lambda_minus*u_-^(q-1), and n the
    trace dimension (the solver itself only supports n=1).
    """

    s: float
    q: float
    lambda_plus: float = 1.0
    lambda_minus: float = 1.0
    n: int = 1

    def __post_init__(self) -> None:
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0,1), got {self.s}")
        if not 1.0 <= self.q < 2.0:
            raise ValueError(f"q must lie in [1,2), got {self.q}")
        if self.lambda_plus < 0.0 or self.lambda_minus < 0.0:
            raise ValueError("phase coefficients must be nonnegative")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")


@dataclass(frozen=True)
class DerivedExponents:
    """Exponents derived from (s, q).

    a = 1 - 2s is the extension weight exponent, k_q = 2s/(2-q) the critical
    vanishing order, beta_q the largest integer order strictly below k_q, and
    mu = k_q*(k_q + 1 - 2s) the angular eigen-parameter at criticality.
    """

    a: float
    k_q: float
    beta_q: int
    mu: float

    def __post_init__(self) -> None:
        if not -1.0 < self.a < 1.0:
            raise ValueError(f"weight exponent a must lie in (-1,1), got {self.a}")
        # Upper bound relaxed by INTEGER_TOL: a k_q within tolerance of an
        # integer takes the integer branch even if it rounds slightly above.
        if not self.beta_q < self.k_q <= self.beta_q + 1 + INTEGER_TOL:
            raise ValueError(
                f"beta_q={self.beta_q} incompatible with k_q={self.k_q}"
            )


def derive_exponents(p: Parameters) -> DerivedExponents:
    """Compute every derived exponent for a parameter set.

    beta_q is floor(k_q) except when k_q is an integer (within INTEGER_TOL),
    in which case the admissible integer orders stop one below k_q.
    """
    a = 1.0 - 2.0 * p.s
    k_q = 2.0 * p.s / (2.0 - p.q)
    nearest = round(k_q)
    if abs(k_q - nearest) < INTEGER_TOL:
        beta_q = int(nearest) - 1
    else:
        beta_q = math.floor(k_q)
    mu = k_q * (k_q + a)
    return DerivedExponents(a=a, k_q=k_q, beta_q=beta_q, mu=mu)


def critical_constant(n: int, t: float, s: float) -> float:
    """The constant 2n - t(n - 2s) controlling the sign structure of the
    Weiss-type derivative; its root in k marks the critical order."""
    if n < 1 or int(n) != n:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not 1.0 <= t <= 2.0:
        raise ValueError(f"t must lie in [1,2], got {t}")
    if not 0.0 < s < 1.0:
        raise ValueError(f"s must lie in (0,1), got {s}")
    return 2.0 * n - t * (n - 2.0 * s)
