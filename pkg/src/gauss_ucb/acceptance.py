"""The acceptance suite: ten numbered checks, each reported on one line.

``run_all(fast=False)`` uses the documented sizes; ``fast=True`` cuts
replication counts and horizons (results are then marked "reduced").
Criterion 9 is informational and never affects the overall verdict.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import bounds, crossing, exploration, gauss_special, policies, simulator


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    reduced: bool = False
    informational: bool = False
    seconds: float = 0.0

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        tags = []
        if self.reduced:
            tags.append("reduced")
        if self.informational:
            tags.append("informational")
        suffix = f" [{', '.join(tags)}]" if tags else ""
        return f"{self.verdict} {self.number:>2} {self.title}{suffix}: {self.detail} ({self.seconds:.1f}s)"


def _partial_second_moment_by_quadrature(x: float) -> float:
    # int_{-x}^inf (z + x)^2 phi(z) dz
    value, _ = integrate.quad(lambda z: (z + x) ** 2 * gauss_special.std_normal_pdf(z), -x, np.inf, epsabs=1e-15, epsrel=1e-13, limit=500)
    return value


def special_functions(fast: bool) -> tuple[bool, str]:
    xs = np.round(np.arange(-100, 101) / 10.0, 10)
    err = max(abs(gauss_special.partial_second_moment(x) - _partial_second_moment_by_quadrature(x)) for x in xs)
    sym = max(abs(gauss_special.std_normal_cdf(x) + gauss_special.std_normal_cdf(-x) - 1.0) for x in xs)
    return err <= 1e-10 and sym <= 1e-14, f"max |moment - quadrature| = {err:.2e}, max symmetry defect = {sym:.2e}"


SQRT_LOG_THRESHOLDS = ((2, 10.1), (20, 7.0), (40, 5.5), (100, 4.0), (200, 3.0))


def sqrt_log_constant_table(fast: bool) -> tuple[bool, str]:
    """Check every T' from each threshold up to a cap; beyond it the constant keeps falling towards 1."""
    cap = 600 if fast else 3000
    values = {t: bounds.sqrt_log_constant(t) for t in range(2, cap + 1)}
    parts, ok = [], True
    for start, limit in SQRT_LOG_THRESHOLDS:
        worst = max(values[t] for t in range(start, cap + 1))
        ok &= worst <= limit
        parts.append(f"T'>={start}: max {worst:.4f} <= {limit}")
    return ok, "; ".join(parts) + f" (T' up to {cap})"


def optimal_level_expansion(fast: bool) -> tuple[bool, str]:
    gaps = []
    for e in range(3, 9):
        t = 10**e
        b = exploration.optimal_level(t).b
        gaps.append(abs(b * b - (2.0 * math.log(t) - 3.0 * math.log(math.log(t)) - math.log(math.pi))))
    monotone = all(g2 <= g1 for g1, g2 in zip(gaps, gaps[1:]))
    ok = monotone and gaps[-1] <= 0.5
    listing = ", ".join(f"{g:.4f}" for g in gaps)
    return ok, f"gaps at T'=1e3..1e8: {listing}; nonincreasing={monotone}, final <= 0.5: {gaps[-1] <= 0.5}"


def drifted_crossing(fast: bool) -> tuple[bool, str]:
    reps, horizon = (10_000, 1000) if fast else (100_000, 10_000)
    grid = crossing.drifted_crossing_grid((1.0, 2.0), (0.2, 0.5, 1.0), horizon, reps, seed=41)
    ok, worst = True, -math.inf
    for (b, g), est in grid.items():
        bound = gauss_special.partial_second_moment(-b) / g**2
        ok &= est.estimate <= bound + 3.0 * est.std_error
        worst = max(worst, est.estimate - bound)
    return ok, f"6 (b, gamma) pairs, T'={horizon}, R={reps}; max(estimate - bound) = {worst:.4f}"


def normalized_walk_size(fast: bool) -> tuple[bool, str]:
    reps = 10_000 if fast else 100_000
    horizons = (100, 1000, 10_000)
    maxima = crossing.normalized_walk_maxima(horizons, reps, seed=43)
    ok, worst_gap, ordering = True, -math.inf, True
    for j, t in enumerate(horizons):
        for b in (2.0, 2.5, 3.0, 3.5):
            est = crossing.CrossingEstimate.from_hits(int(np.count_nonzero(maxima[:, j] >= b)), reps, t, crossing.Discretization.EXACT_INTEGER_TIME)
            numeric = bounds.repeated_test_size_bound(b, t, bounds.SizeBoundMethod.NUMERIC_INTEGRAL)
            closed = bounds.repeated_test_size_bound(b, t, bounds.SizeBoundMethod.CLOSED_FORM)
            ordering &= numeric <= closed
            ok &= est.estimate <= min(numeric, closed) + 3.0 * est.std_error
            worst_gap = max(worst_gap, est.estimate - numeric)
    ok &= ordering
    return ok, f"12 (b, T') cells, R={reps}; max(estimate - numeric bound) = {worst_gap:.4f}; numeric <= closed form: {ordering}"


def lai_boundary(fast: bool) -> tuple[bool, str]:
    reps = 10_000 if fast else 100_000
    ok, implied = True, {}
    for i, x in enumerate((10.0, 100.0, 1000.0, 10_000.0)):
        est = crossing.mc_lai_boundary(x, 1.0, reps, seed=47 + i, points_per_decade=200)
        implied[x] = est.constant
        ok &= est.constant <= bounds.LAI_BOUNDARY_CONSTANT + 3.0 * est.constant_std_error
    trend = implied[10_000.0] < implied[100.0]
    listing = ", ".join(f"{v:.4f}" for v in implied.values())
    return ok and trend, f"implied constants at x=1e1..1e4: {listing} (cap {bounds.LAI_BOUNDARY_CONSTANT}); decreasing 1e2 -> 1e4: {trend}"


REFERENCE_INSTANCE = dict(means=(0.0, -1.0), sigma=1.0, horizon=1000)
REFERENCE_FIXED_LEVEL = math.sqrt(2.0 * math.log(951.0))


def _reference_instance():
    return simulator.BanditInstance.homoscedastic(**REFERENCE_INSTANCE)


def _reps(fast: bool) -> int:
    return 2000 if fast else 10_000


def constant_level_end_to_end(fast: bool) -> tuple[bool, str]:
    inst = _reference_instance()
    level = exploration.fixed_level(REFERENCE_FIXED_LEVEL, inst.horizon_after_init)
    res = simulator.run_replications(inst, policies.constant_ucb(level, inst.horizon), _reps(fast), master_seed=7)
    bound = bounds.constant_ucb_bound(inst, level).grand_total
    lhs = res.mean_post_init_regret + 3.0 * res.std_error
    return lhs <= bound, f"regret {res.mean_post_init_regret:.3f} + 3*{res.std_error:.3f} <= bound {bound:.3f}"


def lai_end_to_end(fast: bool) -> tuple[bool, str]:
    inst = _reference_instance()
    res = simulator.run_replications(inst, policies.lai_ucb(inst.horizon), _reps(fast), master_seed=11)
    arm = bounds.lai_ucb_arm_bound(1.0, inst.sigma, inst.horizon_after_init)
    lhs = res.mean_post_init_regret + 3.0 * res.std_error
    return lhs <= arm.total, f"regret {res.mean_post_init_regret:.3f} + 3*{res.std_error:.3f} <= bound {arm.total:.3f} (excess {arm.excess:.3f})"


def policy_ordering(fast: bool) -> tuple[bool, str]:
    inst = _reference_instance()
    reps = _reps(fast)
    lai = simulator.run_replications(inst, policies.lai_ucb(inst.horizon), reps, master_seed=13)
    level = exploration.sqrt_two_log_level(inst.horizon_after_init)
    const = simulator.run_replications(inst, policies.constant_ucb(level, inst.horizon), reps, master_seed=17)
    margin = 3.0 * math.hypot(lai.std_error, const.std_error)
    ok = lai.mean_post_init_regret <= const.mean_post_init_regret + margin
    note = "" if ok else "; Lai's index did worse on this instance"
    return ok, f"Lai {lai.mean_post_init_regret:.3f} vs constant sqrt(2 log T') {const.mean_post_init_regret:.3f} (margin {margin:.3f}){note}"


def _same_choices_under_affine_map(seed: int) -> bool:
    base = simulator.BanditInstance((0.0, -0.4, -1.0), (1.0, 0.7, 1.0), 1.0, 400)
    moved =simulator.BanditInstance(tuple(2.0 * m + 0.75 for m in base.means), tuple(2.0 * s for s in base.stds), 2.0, 400)
    for make in (lambda inst: policies.lai_ucb(inst.horizon, inst.sigma),
                 lambda inst: policies.constant_ucb(exploration.sqrt_two_log_level(inst.horizon_after_init), inst.horizon, inst.sigma)):
        a = simulator.run_episode(base, make(base), seed).arms
        b = simulator.run_episode(moved, make(moved), seed).arms
        if not np.array_equal(a, b):
            return False
    return True


def property_suite(fast: bool) -> tuple[bool, str]:
    checks = {}
    inst = _reference_instance()
    spec = policies.lai_ucb(inst.horizon)
    r1 = simulator.run_replications(inst, spec, 64, master_seed=3)
    r2 = simulator.run_replications(inst, spec, 64, master_seed=3)
    checks["determinism"] = np.array_equal(r1.post_init_regrets, r2.post_init_regrets) and np.array_equal(r1.mean_regret_curve, r2.mean_regret_curve)

    null = simulator.BanditInstance.homoscedastic((0.5, 0.5, 0.5), 1.0, 200)
    traces = list(simulator.iter_traces(null, policies.lai_ucb(null.horizon), 8, master_seed=5))
    checks["null instance"] = all(np.all(t.cumulative_pseudo_regret == 0.0) for t in traces)
    checks["pull conservation"] = all(int(t.pulls_per_arm.sum()) == null.horizon and np.all(t.pulls_per_arm >= 1) for t in traces)
    checks["affine invariance"] = all(_same_choices_under_affine_map(s) for s in (1, 2, 3))

    grid = np.linspace(math.sqrt(2.0), 12.0, 20_001)
    worst = max(bounds.lai_tail_correction(float(b)) for b in grid)
    checks[f"tail correction max {worst:.6f} < {bounds.TAIL_CORRECTION_SUP}"] = worst < bounds.TAIL_CORRECTION_SUP

    identity = 0.0
    for b in (0.5, 1.0, 2.0, 3.0, 5.0):
        for theta in (0.05, 0.3, 1.0, 2.0, 4.0):
            t = crossing.sqrt_stopping_bound(b, theta)
            g = crossing.conditional_drift_deficit(b, theta)
            identity = max(identity, abs(theta * t * t - (b * t + g)))
    checks[f"stopping identity {identity:.1e}"] = identity <= 1e-12
    failed = [k for k, v in checks.items() if not v]
    return not failed, "; ".join(f"{k}: {'ok' if v else 'FAILED'}" for k, v in checks.items())


CRITERIA: tuple[tuple[int, str, Callable[[bool], tuple[bool, str]], bool], ...] = (
    (1, "special-function fidelity", special_functions, False),
    (2, "sqrt(2 log T') constant table", sqrt_log_constant_table, False),
    (3, "optimal-level expansion", optimal_level_expansion, False),
    (4, "drifted square-root boundary", drifted_crossing, False),
    (5, "repeated-test size bound", normalized_walk_size, False),
    (6, "Lai boundary crossing constant", lai_boundary, False),
    (7, "constant-level UCB end to end", constant_level_end_to_end, False),
    (8, "Lai UCB end to end", lai_end_to_end, False),
    (9, "policy ordering", policy_ordering, True),
    (10, "property suite", property_suite, False),
)

# Checks whose cost does not depend on replication counts.
_SIZE_FREE = {1, 3, 10}


def run_criterion(number: int, fast: bool = False) -> CriterionResult:
    for num, title, check, informational in CRITERIA:
        if num == number:
            start = time.perf_counter()
            passed, detail = check(fast)
            return CriterionResult(num, title, bool(passed), detail, fast and num not in _SIZE_FREE, informational, time.perf_counter() - start)
    raise ValueError(f"no criterion numbered {number}")


def run_all(fast: bool = False, on_result: Callable[[CriterionResult], None] | None = None) -> list[CriterionResult]:
    results = []
    for num, *_ in CRITERIA:
        result = run_criterion(num, fast)
        if on_result is not None:
            on_result(result)
        results.append(result)
    return results


def overall_pass(results) -> bool:
    return all(r.passed for r in results if not r.informational)
