"""Boundary-crossing probabilities: Monte Carlo estimators and analytic bounds.

Random walks are generated time-major in blocks of ``PATHS_PER_BLOCK``
paths, each block with its own stream.  The first m steps of a path are the
same whatever horizon is requested, so estimates at different horizons with
the same seed use common random numbers and are pathwise monotone.

Integer-time events (normalised walk maxima, drifted square-root
boundaries) are simulated exactly.  Brownian-path events are observed on a
grid, which can only miss crossings: those estimates are biased low and are
used for one-sided "estimate <= bound" checks only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy import integrate, optimize

from .gauss_special import std_normal_cdf, truncated_normal_mean
from .streams import derive_seed, generator

PATHS_PER_BLOCK = 512
STEPS_PER_CHUNK = 1024


class Discretization(str, enum.Enum):
    EXACT_INTEGER_TIME = "exact_integer_time"
    EULER_APPROX = "euler_approx"


@dataclass(frozen=True)
class CrossingEstimate:
    estimate: float
    std_error: float
    replications: int
    path_steps: int
    discretization: Discretization

    @classmethod
    def from_hits(cls, hits: int, replications: int, path_steps: int, discretization: Discretization):
        p = hits / replications
        return cls(p, math.sqrt(p * (1.0 - p) / replications), replications, path_steps, Discretization(discretization))


def _check_replications(replications: int) -> None:
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")


def _normal_chunks(steps: int, replications: int, seed: int) -> Iterator[tuple[slice, int, np.ndarray]]:
    """Yield (path slice, first step index, z) with z of shape (chunk_steps, block_paths).

    Path blocks come in order; within a block the chunks cover steps
    0, 1, ..., steps - 1 in order.
    """
    for j, start in enumerate(range(0, replications, PATHS_PER_BLOCK)):
        width = min(PATHS_PER_BLOCK, replications - start)
        rng = generator(derive_seed(seed, j))
        for s0 in range(0, steps, STEPS_PER_CHUNK):
            c = min(STEPS_PER_CHUNK, steps - s0)
            yield slice(start, start + width), s0, rng.standard_normal((c, width))


def _running_max_at(values: np.ndarray, s0: int, checkpoints: Sequence[int], best: np.ndarray, out: np.ndarray) -> None:
    """Fold ``values`` (chunk_steps, paths) covering steps s0+1.. into the running
    max ``best``; record ``best`` into ``out[:, i]`` at every checkpoint in the chunk."""
    c = values.shape[0]
    pos = 0
    for i, h in enumerate(checkpoints):
        if s0 < h <= s0 + c:
            end = h - s0
            if end > pos:
                np.maximum(best, values[pos:end].max(axis=0), out=best)
                pos = end
            out[:, i] = best
    if pos < c:
        np.maximum(best, values[pos:].max(axis=0), out=best)


def normalized_walk_maxima(horizons: Sequence[int], replications: int, seed: int) -> np.ndarray:
    """max_{1<=m<=h} S_m / sqrt(m) for each path and each horizon h; shape (R, len(horizons))."""
    _check_replications(replications)
    hs = sorted(int(h) for h in horizons)
    if hs[0] < 1:
        raise ValueError("horizons must be >= 1")
    top = hs[-1]
    inv_sqrt = 1.0 / np.sqrt(np.arange(1, top + 1, dtype=float))
    out = np.empty((replications, len(hs)))
    for paths, s0, z in _normal_chunks(top, replications, seed):
        if s0 == 0:
            running = np.zeros(z.shape[1])
            best = np.full(z.shape[1], -np.inf)
            block_out = out[paths]  # a view: checkpoints are written in place
        sums = np.cumsum(z, axis=0)
        sums += running
        running = sums[-1].copy()
        sums *= inv_sqrt[s0 : s0 + z.shape[0], None]
        _running_max_at(sums, s0, hs, best, block_out)
    order = [hs.index(int(h)) for h in horizons]
    return out[:, order]


def drifted_walk_maxima(gammas: Sequence[float], horizon: int, replications: int, seed: int) -> np.ndarray:
    """max_{1<=m<=T'} (S_m - m gamma) / sqrt(m) per path and drift; shape (R, len(gammas))."""
    _check_replications(replications)
    horizon = int(horizon)
    g = np.asarray(gammas, dtype=float)
    m = np.arange(1, horizon + 1, dtype=float)
    inv_sqrt = 1.0 / np.sqrt(m)
    out = np.empty((replications, g.size))
    for paths, s0, z in _normal_chunks(horizon, replications, seed):
        if s0 == 0:
            running = np.zeros(z.shape[1])
            best = np.full((g.size, z.shape[1]), -np.inf)
        sums = np.cumsum(z, axis=0)
        sums += running
        running = sums[-1].copy()
        mm = m[s0 : s0 + z.shape[0], None]
        scale = inv_sqrt[s0 : s0 + z.shape[0], None]
        for i, gamma in enumerate(g):
            np.maximum(best[i], ((sums - mm * gamma) * scale).max(axis=0), out=best[i])
        if s0 + z.shape[0] == horizon:
            out[paths] = best.T
    return out


def mc_max_normalized_walk(b: float, horizon_after_init: int, replications: int, seed: int) -> CrossingEstimate:
    """Estimate of P{max_{1<=m<=T'} S_m / sqrt(m) >= b} for a Gaussian random walk."""
    if b < 0.0:
        raise ValueError(f"b must be non-negative, got {b}")
    maxima = normalized_walk_maxima([horizon_after_init], replications, seed)[:, 0]
    return CrossingEstimate.from_hits(int(np.count_nonzero(maxima >= b)), replications, int(horizon_after_init), Discretization.EXACT_INTEGER_TIME)


def mc_drifted_crossing(b: float, gamma: float, horizon_after_init: int, replications: int, seed: int) -> CrossingEstimate:
    """Estimate of P{exists m <= T': S_m >= sqrt(m) b + m gamma}."""
    if not b > 0.0 or not gamma > 0.0:
        raise ValueError("b and gamma must be positive")
    maxima = drifted_walk_maxima([gamma], horizon_after_init, replications, seed)[:, 0]
    return CrossingEstimate.from_hits(int(np.count_nonzero(maxima >= b)), replications, int(horizon_after_init), Discretization.EXACT_INTEGER_TIME)


def drifted_crossing_grid(bs: Sequence[float], gammas: Sequence[float], horizon_after_init: int, replications: int, seed: int) -> dict:
    """{(b, gamma): CrossingEstimate} over a grid, all from one set of paths."""
    maxima = drifted_walk_maxima(gammas, horizon_after_init, replications, seed)
    return {
        (b, g): CrossingEstimate.from_hits(int(np.count_nonzero(maxima[:, j] >= b)), replications, int(horizon_after_init), Discretization.EXACT_INTEGER_TIME)
        for b in bs
        for j, g in enumerate(gammas)
    }


# -- Lai's slowly changing boundary -------------------------------------------------------


def lai_boundary_grid(n: float, points_per_decade: int = 200, decades: int = 8) -> np.ndarray:
    """Geometric time grid on [n 10^-decades, n]."""
    if points_per_decade < 10:
        raise ValueError(f"points_per_decade must be >= 10, got {points_per_decade}")
    k = np.arange(decades * points_per_decade + 1, dtype=float)
    t = n * 10.0 ** (k / points_per_decade - decades)
    t[-1] = n
    return t


@dataclass(frozen=True)
class LaiBoundaryEstimate:
    probability: CrossingEstimate
    scale: float  # n gamma^2

    @property
    def constant(self) -> float:
        return self.scale * self.probability.estimate

    @property
    def constant_std_error(self) -> float:
        return self.scale * self.probability.std_error


def mc_lai_boundary(
    n: float,
    gamma: float,
    replications: int,
    seed: int,
    points_per_decade: int = 200,
    decades: int = 8,
) -> LaiBoundaryEstimate:
    """Estimate of P{sup_{0<t<=n} |W(t)| / (sqrt(2 t log_plus(n/t)) + t gamma) >= 1}.

    The Brownian path is observed on :func:`lai_boundary_grid`, so the
    estimate is biased low.  The implied constant is ``n gamma^2`` times it.
    """
    if not n > 0.0 or not gamma > 0.0:
        raise ValueError("n and gamma must be positive")
    _check_replications(replications)
    t = lai_boundary_grid(n, points_per_decade, decades)
    sd = np.sqrt(np.diff(t, prepend=0.0))
    boundary = np.sqrt(2.0 * t * np.maximum(1.0, np.log(n / t))) + t * gamma
    inv_boundary = 1.0 / boundary
    hits = 0
    for paths, s0, z in _normal_chunks(t.size, replications, seed):
        if s0 == 0:
            w = np.zeros(z.shape[1])
            crossed = np.zeros(z.shape[1], dtype=bool)
        c = z.shape[0]
        path = np.cumsum(z * sd[s0 : s0 + c, None], axis=0)
        path += w
        w = path[-1].copy()
        crossed |= (np.abs(path) * inv_boundary[s0 : s0 + c, None]).max(axis=0) >= 1.0
        if s0 + c == t.size:
            hits += int(np.count_nonzero(crossed))
    est = CrossingEstimate.from_hits(hits, replications, t.size, Discretization.EULER_APPROX)
    return LaiBoundaryEstimate(est, n * gamma * gamma)


def _lai_boundary_level(t, n):
    return math.sqrt(2.0 * max(1.0, math.log(n / t))) + math.sqrt(t)


def lai_boundary_minimizer(n: float) -> float:
    """argmin_t of sqrt(2 log_plus(n/t)) + sqrt(t) (unit drift)."""
    if n < 2.0 * math.e:
        return n / math.e
    # t log(n/t) increases from 0 to n/e on (0, n/e]; solve t log(n/t) = 2.
    log_n = math.log(n)
    return optimize.brentq(lambda t: t * (log_n - math.log(t)) - 2.0, 1e-300, n / math.e, xtol=1e-300, rtol=1e-15, maxiter=500)


def lai_boundary_constant_bound(x: float, beta: float = 3.5) -> float:
    """Analytic upper bound on x * P(crossing Lai's boundary) at n gamma^2 = x.

    Sum of three terms at unit drift, with b(t) = sqrt(2 log_plus(x/t)) + sqrt(t)
    minimised at t0 and g0(beta) = min(beta - 1, 3 + 4 (sqrt(beta) - 2)_+):

        2 x Phi(-b(t0))
        + sqrt(2/pi) g0 / log(beta) * x b(t0) exp(-b(t0)^2 / 2)
        + sqrt(2 beta / pi) / log(beta) * int_0^x (x/t) b(t) exp(-b(t)^2 / 2) dt

    The integral is taken in u = log t.
    """
    if not x > 0.0:
        raise ValueError(f"x must be positive, got {x}")
    if not beta > 1.0:
        raise ValueError(f"beta must exceed 1, got {beta}")
    t0 = lai_boundary_minimizer(x)
    b0 = _lai_boundary_level(t0, x)
    g0 = min(beta - 1.0, 3.0 + 4.0 * max(math.sqrt(beta) - 2.0, 0.0))
    log_beta = math.log(beta)
    head = 2.0 * x * std_normal_cdf(-b0)
    middle = math.sqrt(2.0 / math.pi) * g0 / log_beta * x * b0 * math.exp(-0.5 * b0 * b0)

    def integrand(u: float) -> float:
        t = math.exp(u)
        b = _lai_boundary_level(t, x)
        return x * b * math.exp(-0.5 * b * b)

    log_x = math.log(x)
    # Below t = x e^-80 the integrand is under x e^-80; above t ~ 2000 exp(-t/2) kills it.
    lo, hi = log_x - 80.0, min(log_x, math.log(4000.0))
    pts = sorted({p for p in (log_x - 1.0, math.log(t0)) if lo < p < hi})
    if hi > lo:
        tail, _ = integrate.quad(integrand, lo, hi, points=pts or None, epsabs=1e-14, epsrel=1e-11, limit=500)
    else:
        tail = 0.0
    return head + middle + math.sqrt(2.0 * beta / math.pi) / log_beta * tail


def lai_boundary_constant_sup(beta: float = 3.5) -> tuple[float, float]:
    """(sup_x lai_boundary_constant_bound(x), argmax), by a log grid then local refinement."""
    grid = np.logspace(-3, 8, 441)
    vals = [lai_boundary_constant_bound(float(x), beta) for x in grid]
    i = int(np.argmax(vals))
    lo, hi = math.log(grid[max(i - 1, 0)]), math.log(grid[min(i + 1, grid.size - 1)])
    res = optimize.minimize_scalar(lambda lx: -lai_boundary_constant_bound(math.exp(lx), beta), bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    if -res.fun >= vals[i]:
        return -res.fun, math.exp(res.x)
    return vals[i], float(grid[i])


# -- expected stopping time of the two-sided square-root boundary ---------------------------


def conditional_drift_deficit(b: float, theta: float) -> float:
    """E_theta[theta - X(1) | |X(1)| < b] for X(1) = theta + Z."""
    if not b > 0.0:
        raise ValueError(f"b must be positive, got {b}")
    return -truncated_normal_mean(-b - theta, b - theta)


def sqrt_stopping_bound(b: float, theta: float) -> float:
    """Positive root t of theta t^2 = b t + g, g the conditional drift deficit."""
    if not theta > 0.0:
        raise ValueError(f"theta must be positive, got {theta}")
    g = conditional_drift_deficit(b, theta)
    return (b + math.sqrt(b * b + 4.0 * theta * g)) / (2.0 * theta)


@dataclass(frozen=True)
class StoppingCheck:
    mean_sqrt_tau: float
    std_error: float
    bound: float
    cap_hit_fraction: float
    replications: int
    dt: float

    @property
    def passed(self) -> bool:
        return self.mean_sqrt_tau <= self.bound + 3.0 * self.std_error


def mc_stopping_check(b: float, theta: float, dt: float, replications: int, seed: int, cap_factor: float = 100.0) -> StoppingCheck:
    """Monte Carlo of E_theta[sqrt(tau_b) | tau_b > 1] against the analytic bound.

    tau_b is the first t >= 1 with |X(t)| >= b sqrt(t), X(t) = W(t) + theta t.
    X(1) is drawn from its law conditioned on |X(1)| < b by rejection; the
    path is then advanced with Euler steps of size ``dt`` and capped at
    ``cap_factor * bound^2``.  Grid observation detects crossings late, so
    the sample mean is biased upward.
    """
    if not dt < 0.01:
        raise ValueError(f"dt must be below 0.01, got {dt}")
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    _check_replications(replications)
    bound = sqrt_stopping_bound(b, theta)
    t_max = cap_factor * bound * bound
    max_steps = int(math.ceil((t_max - 1.0) / dt))
    sqrt_dt = math.sqrt(dt)
    tau = np.empty(replications)
    capped = 0
    for j, start in enumerate(range(0, replications, PATHS_PER_BLOCK)):
        width = min(PATHS_PER_BLOCK, replications - start)
        rng = generator(derive_seed(seed, j))
        x = np.empty(0)
        while x.size < width:
            draw = theta + rng.standard_normal(2 * (width - x.size) + 16)
            x = np.concatenate([x, draw[np.abs(draw) < b]])
        x = x[:width]
        alive = np.arange(width)
        block_tau = np.empty(width)
        k0 = 0
        while alive.size and k0 < max_steps:
            c = min(STEPS_PER_CHUNK, max_steps - k0)
            incr = theta * dt + sqrt_dt * rng.standard_normal((c, alive.size))
            path = np.cumsum(incr, axis=0) + x[alive]
            times = 1.0 + dt * np.arange(k0 + 1, k0 + c + 1)
            hit = np.abs(path) >= b * np.sqrt(times)[:, None]
            any_hit = hit.any(axis=0)
            first = hit.argmax(axis=0)
            block_tau[alive[any_hit]] = times[first[any_hit]]
            x[alive] = path[-1]
            alive = alive[~any_hit]
            k0 += c
        block_tau[alive] = t_max
        capped += alive.size
        tau[start : start + width] = block_tau
    root = np.sqrt(tau)
    se = float(root.std(ddof=1) / math.sqrt(replications)) if replications > 1 else float("nan")
    return StoppingCheck(float(root.mean()), se, bound, capped / replications, replications, dt)
