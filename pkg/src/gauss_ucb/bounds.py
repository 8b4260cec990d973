"""Regret bounds for Gaussian UCB rules, evaluated numerically.

Conventions: ``horizon_after_init`` is T' = T - K; ``gamma`` is a gap in
units of the prespecified noise level sigma; ``kappa = T' * gamma**2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .crossing import lai_boundary_constant_bound
from .exploration import (
    ExplorationLevel,
    iterated_log_plus,
    lai_breakeven_level,
    optimal_level,
    sqrt_two_log_level,
)
from .gauss_special import (
    SQRT2,
    partial_second_moment,
    std_normal_cdf,
    std_normal_pdf,
)
from .simulator import BanditInstance

# Proven constants used by the Lai-UCB bound.
LAI_BOUNDARY_CONSTANT = 1.7068  # sup_x of x * P(crossing Lai's boundary at drift level x)
LAI_EXCESS_CAP = 14.8
LAI_SMALL_KAPPA = 20.47
DEFAULT_SPLIT_FRACTION = 0.573
TAIL_CORRECTION_SUP = 0.3487

_QUAD = dict(epsabs=1e-13, epsrel=1e-12, limit=400)


class SizeBoundMethod(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERIC_INTEGRAL = "numeric_integral"


class BoundKind(str, enum.Enum):
    CONSTANT_UCB = "constant_ucb"
    SQRT_LOG_UCB = "sqrt_log_ucb"
    OPTIMAL_LEVEL_UCB = "optimal_level_ucb"
    LAI_UCB = "lai_ucb"
    LAI_ROBBINS_LOWER = "lai_robbins_lower"
    AUER_UPPER = "auer_upper"


@dataclass
class BoundEntry:
    arm: int
    gap: float
    normalized_gap: float
    leading_term: float
    correction_term: float

    @property
    def total(self) -> float:
        return self.leading_term + self.correction_term


@dataclass
class BoundReport:
    kind: BoundKind
    entries: list[BoundEntry]
    notes: dict = field(default_factory=dict)

    @property
    def grand_total(self) -> float:
        return math.fsum(e.total for e in self.entries)


def _suboptimal(instance: BanditInstance):
    gaps = instance.gaps
    return [(a, float(gaps[a])) for a in range(instance.n_arms) if gaps[a] > 0.0]


# -- size of the repeated significance test ---------------------------------------


def _level_band_mass(b: float, x: float) -> float:
    """P(|Z + x b| <= b)."""
    return std_normal_cdf(b - x * b) - std_normal_cdf(-b - x * b)


def repeated_test_size_bound(b: float, horizon_after_init: int, method=SizeBoundMethod.NUMERIC_INTEGRAL) -> float:
    """Upper bound on P{max_{1<=m<=T'} W(m)/sqrt(m) >= b}, capped at 1.

    Both methods bound the continuous-time two-sided event on [1, T'].
    CLOSED_FORM is ``phi(b) (2b log(e sqrt(T')) + sqrt(2/pi) + 4/b)``.
    NUMERIC_INTEGRAL evaluates the integrals that closed form relaxes:
    ``2 phi(b) [b I1 + I2] + (2/b) phi(b)`` with

    * ``I1 = int_0^inf min(sqrt(T'), 1/x) P(|Z + xb| <= b) dx`` by quadrature,
    * ``I2 = (1/b) int_0^inf (phi(b - t) - phi(b + t)) dt = (Phi(b) - Phi(-b)) / b``.
    """
    if not b > 0.0:
        raise ValueError(f"b must be positive, got {b}")
    m = int(horizon_after_init)
    if m < 1:
        raise ValueError(f"horizon_after_init must be >= 1, got {m}")
    method = SizeBoundMethod(method)
    pdf_b = std_normal_pdf(b)
    if method is SizeBoundMethod.CLOSED_FORM:
        value = pdf_b * (2.0 * b * math.log(math.e * math.sqrt(m)) + math.sqrt(2.0 / math.pi) + 4.0 / b)
        return min(1.0, value)
    root_m = math.sqrt(m)
    split = 1.0 / root_m
    near, _ = integrate.quad(lambda x: _level_band_mass(b, x), 0.0, split, **_QUAD)
    # The band mass is negligible once x b - b exceeds ~40.
    upper = max(split, 1.0 + 40.0 / b)
    far, _ = integrate.quad(lambda x: _level_band_mass(b, x) / x, split, upper, points=[1.0] if split < 1.0 < upper else None, **_QUAD)
    i1 = root_m * near + far
    i2 = (std_normal_cdf(b) - std_normal_cdf(-b)) / b
    value = 2.0 * pdf_b * (b * i1 + i2) + 2.0 * pdf_b / b
    return min(1.0, value)


# -- constant exploration level ---------------------------------------------------------


def constant_ucb_excess(b: float, horizon_after_init: int, method=SizeBoundMethod.NUMERIC_INTEGRAL) -> float:
    """4 T' E[(Z - b)_+^2] + 3 (b^2 + 1) * (size bound at level b)."""
    t = int(horizon_after_init)
    return 4.0 * t * partial_second_moment(-b) + 3.0 * (b * b + 1.0) * repeated_test_size_bound(b, t, method)


def _constant_level_report(kind, instance, b, t_after, method, notes=None) -> BoundReport:
    sigma = instance.sigma
    excess = constant_ucb_excess(b, t_after, method)
    entries = [
        BoundEntry(a, gap, gap / sigma, sigma**2 * b * b / gap, sigma**2 * (1.0 + excess) / gap)
        for a, gap in _suboptimal(instance)
    ]
    info = {"b": b, "horizon_after_init": t_after, "excess": excess, "size_bound_method": SizeBoundMethod(method).value}
    info.update(notes or {})
    return BoundReport(kind, entries, info)


def constant_ucb_bound(instance: BanditInstance, level: ExplorationLevel, method=SizeBoundMethod.NUMERIC_INTEGRAL) -> BoundReport:
    """sum over suboptimal arms of sigma^2 (b^2 + 1 + excess(b)) / gap.

    The excess is evaluated at the instance's own T' = T - K; the level only
    contributes ``b``.
    """
    return _constant_level_report(BoundKind.CONSTANT_UCB, instance, level.b, instance.horizon_after_init, method)


def sqrt_log_constant(horizon_after_init: int, method=SizeBoundMethod.NUMERIC_INTEGRAL) -> float:
    """Additive constant c with numerator 2 log T' + c at level b = sqrt(2 log T')."""
    level = sqrt_two_log_level(horizon_after_init)
    return 1.0 + constant_ucb_excess(level.b, level.horizon_after_init, method)


def sqrt_log_bound(instance: BanditInstance, method=SizeBoundMethod.NUMERIC_INTEGRAL) -> BoundReport:
    t_after = instance.horizon_after_init
    level = sqrt_two_log_level(t_after)
    return _constant_level_report(
        BoundKind.SQRT_LOG_UCB, instance, level.b, t_after, method,
        {"additive_constant": sqrt_log_constant(t_after, method)},
    )


def optimal_level_expansion(horizon_after_init: int) -> float:
    """2 log T' - 3 log log T' - log(pi) + 1, the large-T' form of the optimal-level numerator."""
    t = int(horizon_after_init)
    if t < 3:
        raise ValueError(f"expansion needs T' >= 3, got {t}")
    lt = math.log(t)
    return 2.0 * lt - 3.0 * math.log(lt) - math.log(math.pi) + 1.0


def optimal_level_numerator(horizon_after_init: int, method=SizeBoundMethod.NUMERIC_INTEGRAL) -> float:
    level = optimal_level(horizon_after_init)
    return level.b**2 + 1.0 + constant_ucb_excess(level.b, horizon_after_init, method)


def optimal_level_bound(instance: BanditInstance, method=SizeBoundMethod.NUMERIC_INTEGRAL) -> BoundReport:
    """Constant-level bound at the level minimising b^2 + 4 T' E[(Z - b)_+^2].

    The rigorous value is the bound; the asymptotic expansion is attached in
    ``notes`` for comparison only.
    """
    t_after = instance.horizon_after_init
    if t_after < 3:
        raise ValueError(f"optimal-level bound needs T' >= 3, got {t_after}")
    level = optimal_level(t_after)
    numerator = level.b**2 + 1.0 + constant_ucb_excess(level.b, t_after, method)
    return _constant_level_report(
        BoundKind.OPTIMAL_LEVEL_UCB, instance, level.b, t_after, method,
        {"numerator": numerator, "expansion_numerator": optimal_level_expansion(t_after)},
    )


# -- Lai's index -----------------------------------------------------------------------


def lai_tail_correction(b: float) -> float:
    """E[(b^2/2 - (Z - b)^2) 1{Z > b'}] with b' = b (1 - 1/sqrt 2), for b >= sqrt 2."""
    if b < SQRT2:
        raise ValueError(f"tail correction is only used for b >= sqrt(2), got {b}")
    bp = b * (1.0 - 1.0 / SQRT2)
    return (2.0 * b - bp) * std_normal_pdf(bp) - (1.0 + 0.5 * b * b) * std_normal_cdf(-bp)


def worst_tail_correction(gamma: float, horizon_after_init: int, split_fraction: float) -> float:
    """Max of the tail correction at the breakeven level over drifts gamma (1 + y), -split <= y <= 0.

    The breakeven level increases with the drift, so this is a maximisation of
    a smooth function of b over an interval: dense grid, then local refinement.
    """
    b_lo = lai_breakeven_level(gamma * (1.0 - split_fraction), horizon_after_init)
    b_hi = lai_breakeven_level(gamma, horizon_after_init)
    b_lo = max(b_lo, SQRT2)
    b_hi = max(b_hi, b_lo)
    grid = np.linspace(b_lo, b_hi, 257)
    vals = [lai_tail_correction(b) for b in grid]
    i = int(np.argmax(vals))
    best = vals[i]
    if b_hi > b_lo:
        lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
        res = optimize.minimize_scalar(lambda b: -lai_tail_correction(b), bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = max(best, -res.fun)
    return best


def lai_crossing_integral(
    kappa: float,
    split_fraction: float,
    horizon_after_init: int,
    gamma: float,
    tail_correction: float | None = None,
    boundary_constant: float = LAI_BOUNDARY_CONSTANT,
) -> float:
    """4 int_0^s [L(y) + 1/(L(y) + 1) + (c - 1)/2] / (1 - y)^3 * min(1, C / (kappa y^2)) dy

    with L(y) = iterated_log_plus(kappa (1 - y)^2), c the worst tail correction
    over the band and C the boundary constant.
    """
    if not kappa > 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if not 0.0 < split_fraction < 1.0:
        raise ValueError(f"split fraction must lie in (0, 1), got {split_fraction}")
    c = worst_tail_correction(gamma, horizon_after_init, split_fraction) if tail_correction is None else tail_correction

    def integrand(y: float) -> float:
        lv = iterated_log_plus(kappa * (1.0 - y) ** 2)
        crossing = 1.0 if y == 0.0 else min(1.0, boundary_constant / (kappa * y * y))
        return (lv + 1.0 / (lv + 1.0) + 0.5 * (c - 1.0)) / (1.0 - y) ** 3 * crossing

    kinks = [math.sqrt(boundary_constant / kappa)]
    # log_plus saturates where kappa (1 - y)^2 crosses e (outermost level).
    if kappa > math.e:
        kinks.append(1.0 - math.sqrt(math.e / kappa))
    kinks = sorted(p for p in kinks if 0.0 < p < split_fraction)
    value, _ = integrate.quad(integrand, 0.0, split_fraction, points=kinks or None, epsabs=1e-10, epsrel=1e-10, limit=400)
    return 4.0 * value


@dataclass
class LaiArmBound:
    normalized_gap: float
    sigma: float
    horizon_after_init: int
    kappa: float
    excess: float
    uncapped_excess: float | None
    tail_correction: float | None
    crossing_integral: float | None
    boundary_term: float | None

    @property
    def gap(self) -> float:
        return self.sigma * self.normalized_gap

    @property
    def numerator(self) -> float:
        return 2.0 * iterated_log_plus(self.kappa) + 1.0 + self.excess

    @property
    def total(self) -> float:
        return self.sigma**2 * self.numerator / self.gap


def lai_ucb_arm_bound(
    normalized_gap: float,
    sigma: float,
    horizon_after_init: int,
    split_fraction: float = DEFAULT_SPLIT_FRACTION,
    boundary: str = "uniform",
) -> LaiArmBound:
    """Per-arm bound sigma^2 (2 L(kappa) + 1 + excess) / gap for Lai's index.

    ``boundary`` picks the bound on the crossing constant at ``split^2 kappa``:
    ``"uniform"`` uses the proven supremum 1.7068, ``"analytic"`` the pointwise
    bound from :func:`gauss_ucb.crossing.lai_boundary_constant_bound`, which
    decays with kappa.  For kappa <= 20.47 the excess is the cap 14.8.
    """
    if not normalized_gap > 0.0:
        raise ValueError(f"normalized gap must be positive, got {normalized_gap}")
    t = int(horizon_after_init)
    kappa = t * normalized_gap**2
    if kappa <= LAI_SMALL_KAPPA:
        return LaiArmBound(normalized_gap, sigma, t, kappa, LAI_EXCESS_CAP, None, None, None, None)
    tail = worst_tail_correction(normalized_gap, t, split_fraction)
    if boundary == "uniform":
        c0 = LAI_BOUNDARY_CONSTANT
    elif boundary == "analytic":
        c0 = lai_boundary_constant_bound(split_fraction**2 * kappa)
    else:
        raise ValueError(f"unknown boundary option {boundary!r}")
    integral = lai_crossing_integral(kappa, split_fraction, t, normalized_gap, tail)
    boundary_term = c0 / split_fraction**2
    raw = tail + integral + boundary_term
    return LaiArmBound(normalized_gap, sigma, t, kappa, min(LAI_EXCESS_CAP, raw), raw, tail, integral, boundary_term)


def lai_ucb_bound(instance: BanditInstance, **kwargs) -> BoundReport:
    sigma = instance.sigma
    t_after = instance.horizon_after_init
    entries = []
    excesses = {}
    for a, gap in _suboptimal(instance):
        arm = lai_ucb_arm_bound(gap / sigma, sigma, t_after, **kwargs)
        leading = sigma**2 * 2.0 * iterated_log_plus(arm.kappa) / gap
        entries.append(BoundEntry(a, gap, gap / sigma, leading, arm.total - leading))
        excesses[a] = arm.excess
    return BoundReport(BoundKind.LAI_UCB, entries, {"horizon_after_init": t_after, "excess": excesses})


# -- reference lines --------------------------------------------------------------


def lai_robbins_lower_bound(instance: BanditInstance, horizon: int | None = None) -> BoundReport:
    """sum_a 2 std_a^2 log T / gap_a with each arm's true standard deviation.

    An asymptotic (liminf) statement, reported as a reference line.
    """
    t = instance.horizon if horizon is None else int(horizon)
    log_t = math.log(t)
    entries = [
        BoundEntry(a, gap, gap / instance.sigma, 2.0 * instance.stds[a] ** 2 * log_t / gap, 0.0)
        for a, gap in _suboptimal(instance)
    ]
    return BoundReport(BoundKind.LAI_ROBBINS_LOWER, entries, {"asymptotic": True, "horizon": t})


def auer_upper_bound(instance: BanditInstance, horizon: int | None = None) -> BoundReport:
    """8 sum log T / gap + (1 + pi^2/3) sum gap, the UCB1 bound for rewards in [0, 1].

    Shown for context only; it is not a bound for Gaussian rewards.
    """
    t = instance.horizon if horizon is None else int(horizon)
    log_t = math.log(t)
    entries = [
        BoundEntry(a, gap, gap / instance.sigma, 8.0 * log_t / gap, (1.0 + math.pi**2 / 3.0) * gap)
        for a, gap in _suboptimal(instance)
    ]
    return BoundReport(BoundKind.AUER_UPPER, entries, {"bounded_rewards_only": True, "horizon": t})
