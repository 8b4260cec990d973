"""Exploration levels for Gaussian UCB indices.

Two families live here: constant levels ``b`` (the bonus is ``sigma * b /
sqrt(n)``) and the sample-size dependent ``log_plus`` machinery used by
Lai's index and its regret analysis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from scipy import optimize

from .gauss_special import partial_first_moment, partial_second_moment, std_normal_cdf


class LevelMethod(str, enum.Enum):
    SQRT_TWO_LOG = "sqrt_two_log"
    ARGMIN = "argmin"
    FIXED = "fixed"


@dataclass(frozen=True)
class ExplorationLevel:
    """A constant exploration level ``b`` tied to a post-initialisation horizon."""

    b: float
    horizon_after_init: int
    method: LevelMethod = LevelMethod.FIXED

    def __post_init__(self):
        if not (self.b > 0.0 and math.isfinite(self.b)):
            raise ValueError(f"exploration level must be positive and finite, got {self.b}")
        if self.horizon_after_init < 1:
            raise ValueError(f"horizon_after_init must be >= 1, got {self.horizon_after_init}")


def log_plus(x: float) -> float:
    """max(1, log x)."""
    if not x > 0.0:
        raise ValueError(f"log_plus needs x > 0, got {x}")
    return max(1.0, math.log(x))


def iterated_log_plus(x: float) -> float:
    """log_plus(x / log_plus(x / log_plus(x))), the leading term of Lai's regret."""
    if not x > 0.0:
        raise ValueError(f"iterated_log_plus needs x > 0, got {x}")
    return log_plus(x / log_plus(x / log_plus(x)))


def fixed_level(b: float, horizon_after_init: int) -> ExplorationLevel:
    return ExplorationLevel(float(b), int(horizon_after_init), LevelMethod.FIXED)


def sqrt_two_log_level(horizon_after_init: int) -> ExplorationLevel:
    """b = sqrt(2 log T')."""
    t = int(horizon_after_init)
    if t < 2:
        raise ValueError(f"sqrt(2 log T') is degenerate for T' < 2, got {t}")
    return ExplorationLevel(math.sqrt(2.0 * math.log(t)), t, LevelMethod.SQRT_TWO_LOG)


def level_objective(z: float, horizon_after_init: int) -> float:
    """z^2 + 4 T' E[(Z - z)_+^2], the part of the constant-level regret bound
    that the optimal level minimises."""
    return z * z + 4.0 * horizon_after_init * partial_second_moment(-z)


def level_objective_slope(z: float, horizon_after_init: int) -> float:
    return 2.0 * z - 8.0 * horizon_after_init * partial_first_moment(-z)


def _level_objective_curvature(z: float, horizon_after_init: int) -> float:
    return 2.0 + 8.0 * horizon_after_init * std_normal_cdf(-z)


def optimal_level(horizon_after_init: int, tol: float = 1e-12) -> ExplorationLevel:
    """Minimiser over z > 0 of ``level_objective``.

    The objective is strictly convex (curvature >= 2), so its minimiser is the
    unique root of the slope.  Bracketed root finding is followed by Newton
    polishing until ``|slope| <= tol`` or no further progress is possible.
    """
    t = int(horizon_after_init)
    if t < 1:
        raise ValueError(f"horizon_after_init must be >= 1, got {t}")
    lo, hi = 1e-6, math.sqrt(2.0 * math.log(t + 3.0)) + 3.0
    z = optimize.brentq(level_objective_slope, lo, hi, args=(t,), xtol=1e-15, rtol=1e-15, maxiter=500)
    for _ in range(8):
        s = level_objective_slope(z, t)
        if abs(s) <= tol:
            break
        step = s / _level_objective_curvature(z, t)
        if step == 0.0:
            break
        z -= step
    return ExplorationLevel(z, t, LevelMethod.ARGMIN)


def lai_breakeven_size(gamma: float, horizon_after_init: int) -> float:
    """Solution x of gamma^2 x = log_plus(T' / x).

    This is the sample size at which Lai's bonus sqrt(2 log_plus(T'/n) / n)
    falls to sqrt(2) * gamma.
    """
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    t = int(horizon_after_init)
    if t < 1:
        raise ValueError(f"horizon_after_init must be >= 1, got {t}")
    g2 = gamma * gamma
    if t * g2 <= math.e:
        return 1.0 / g2
    log_t = math.log(t)

    def residual(log_x: float) -> float:
        return g2 * math.exp(log_x) - max(1.0, log_t - log_x)

    # Bisection in log x over [T' exp(-T' gamma^2 - 1), max(T', 1/gamma^2)].
    lo = log_t - t * g2 - 1.0
    hi = math.log(max(float(t), 1.0 / g2))
    log_x = optimize.brentq(residual, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return math.exp(log_x)


def lai_breakeven_level(gamma: float, horizon_after_init: int) -> float:
    """gamma * sqrt(2 x) at the breakeven size x; at least sqrt(2) when T' gamma^2 > e."""
    return gamma * math.sqrt(2.0 * lai_breakeven_size(gamma, horizon_after_init))
