"""Gaussian bandit environment and replication engine.

Rewards follow the "stack of rewards" model: for each replication the n-th
pull of arm ``a`` returns ``means[a] + stds[a] * z[a, n]`` where ``z`` is a
(K, T) block of standard normals drawn up front from the replication's own
stream.  A replication's trace is therefore a function of its seed alone,
and blocks of replications can be advanced in lockstep with numpy.

Pseudo-regret (gap-weighted pull counts) is the reported metric.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .policies import BonusRule, PolicySpec
from .streams import derive_seed, generator

BLOCK_SIZE = 512


@dataclass(frozen=True)
class BanditInstance:
    means: tuple[float, ...]
    stds: tuple[float, ...]
    sigma: float
    horizon: int

    def __post_init__(self):
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "stds", tuple(float(s) for s in self.stds))
        k = len(self.means)
        if k < 2:
            raise ValueError(f"need at least 2 arms, got {k}")
        if len(self.stds) != k:
            raise ValueError(f"{k} means but {len(self.stds)} stds")
        if not all(math.isfinite(m) for m in self.means):
            raise ValueError("means must be finite")
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        for a, s in enumerate(self.stds):
            if not 0.0 < s <= self.sigma:
                raise ValueError(f"stds[{a}]={s} must lie in (0, sigma={self.sigma}]")
        if self.horizon < k + 1:
            raise ValueError(f"horizon {self.horizon} must be at least n_arms + 1 = {k + 1}")

    @classmethod
    def homoscedastic(cls, means: Sequence[float], sigma: float, horizon: int) -> BanditInstance:
        return cls(tuple(means), (sigma,) * len(means), sigma, horizon)

    @property
    def n_arms(self) -> int:
        return len(self.means)

    @property
    def best_mean(self) -> float:
        return max(self.means)

    @property
    def gaps(self) -> np.ndarray:
        return self.best_mean - np.asarray(self.means)

    @property
    def normalized_gaps(self) -> np.ndarray:
        return self.gaps / self.sigma

    @property
    def horizon_after_init(self) -> int:
        return self.horizon - self.n_arms


@dataclass
class RegretTrace:
    """One episode: arm pulled and reward received at each round, and the
    running pseudo-regret sum_{s<=t} gap[arm_s]."""

    arms: np.ndarray
    rewards: np.ndarray
    cumulative_pseudo_regret: np.ndarray
    pulls_per_arm: np.ndarray
    seed: int
    replication_id: int = 0


@dataclass
class AggregateResult:
    policy: str
    replications: int
    mean_post_init_regret: float
    std_error: float
    mean_full_regret: float
    mean_pulls: np.ndarray
    mean_regret_curve: np.ndarray
    post_init_regrets: np.ndarray


def _check_pairing(instance: BanditInstance, spec: PolicySpec) -> None:
    if spec.horizon != instance.horizon:
        raise ValueError(f"policy horizon {spec.horizon} != instance horizon {instance.horizon}")
    if spec.sigma != instance.sigma:
        raise ValueError(f"policy sigma {spec.sigma} != instance sigma {instance.sigma}")


def _simulate_block(instance: BanditInstance, spec: PolicySpec, seeds: Sequence[int]):
    """Advance len(seeds) episodes in lockstep; returns (arms, rewards), each (R, T)."""
    k, horizon = instance.n_arms, instance.horizon
    bonus = BonusRule(spec, k)
    r = len(seeds)
    noise = np.empty((r, k, horizon))
    for i, seed in enumerate(seeds):
        generator(seed).standard_normal(out=noise[i])
    mu = np.asarray(instance.means)
    sd = np.asarray(instance.stds)

    rows = np.arange(r)
    pulls = np.zeros((r, k), dtype=np.int64)
    means = np.zeros((r, k))
    arms = np.empty((r, horizon), dtype=np.int64)
    rewards = np.empty((r, horizon))
    for t in range(horizon):
        if t < k:
            choice = np.full(r, t, dtype=np.int64)
        else:
            choice = np.argmax(means + bonus(pulls, t + 1), axis=1)
        n = pulls[rows, choice]
        y = mu[choice] + sd[choice] * noise[rows, choice, n]
        n = n + 1
        pulls[rows, choice] = n
        m = means[rows, choice]
        means[rows, choice] = m + (y - m) / n
        arms[:, t] = choice
        rewards[:, t] = y
    return arms, rewards


def _trace_from_arrays(instance, arms, rewards, seed, replication_id) -> RegretTrace:
    gaps = instance.gaps
    return RegretTrace(
        arms=arms,
        rewards=rewards,
        cumulative_pseudo_regret=np.cumsum(gaps[arms]),
        pulls_per_arm=np.bincount(arms, minlength=instance.n_arms),
        seed=int(seed),
        replication_id=int(replication_id),
    )


def run_episode(instance: BanditInstance, spec: PolicySpec, seed: int, replication_id: int = 0) -> RegretTrace:
    _check_pairing(instance, spec)
    arms, rewards = _simulate_block(instance, spec, [seed])
    return _trace_from_arrays(instance, arms[0], rewards[0], seed, replication_id)


def post_init_regret(trace: RegretTrace, instance: BanditInstance) -> float:
    """sum_a gap_a * (n_a - 1): pseudo-regret after the K initial pulls."""
    return float(np.dot(instance.gaps, trace.pulls_per_arm - 1))


def replication_seeds(master_seed: int, replications: int) -> list[int]:
    return [derive_seed(master_seed, r) for r in range(replications)]


def iter_traces(instance: BanditInstance, spec: PolicySpec, replications: int, master_seed: int) -> Iterator[RegretTrace]:
    """Yield the trace of every replication in replication order."""
    _check_pairing(instance, spec)
    seeds = replication_seeds(master_seed, replications)
    for start in range(0, replications, BLOCK_SIZE):
        block = seeds[start : start + BLOCK_SIZE]
        arms, rewards = _simulate_block(instance, spec, block)
        for i, seed in enumerate(block):
            yield _trace_from_arrays(instance, arms[i], rewards[i], seed, start + i)


def _block_counts(args):
    """Per-replication pull counts and per-round pull-count curves of one block."""
    instance, spec, seeds = args
    arms, _ = _simulate_block(instance, spec, seeds)
    k = instance.n_arms
    onehot = arms[:, :, None] == np.arange(k)
    pulls = onehot.sum(axis=1)
    curve_counts = np.cumsum(onehot.sum(axis=0), axis=0)  # (T, K), integer
    return pulls, curve_counts


def run_replications(
    instance: BanditInstance,
    spec: PolicySpec,
    replications: int,
    master_seed: int,
    workers: int = 1,
) -> AggregateResult:
    """Monte Carlo estimate of the post-initialisation regret.

    Blocks may run in worker processes.  Block boundaries are fixed by
    ``BLOCK_SIZE`` and the reduction adds integer pull counts, so the result
    does not depend on ``workers``.
    """
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    _check_pairing(instance, spec)
    seeds = replication_seeds(master_seed, replications)
    jobs = [(instance, spec, seeds[s : s + BLOCK_SIZE]) for s in range(0, replications, BLOCK_SIZE)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block_counts, jobs))
    else:
        results = [_block_counts(job) for job in jobs]

    pulls = np.concatenate([p for p, _ in results])
    curve_counts = sum(c for _, c in results)
    gaps = instance.gaps
    post = ((pulls - 1) * gaps).sum(axis=1)
    std_error = float(np.std(post, ddof=1) / math.sqrt(replications)) if replications > 1 else float("nan")
    total_post = (pulls - 1).sum(axis=0) @ gaps
    return AggregateResult(
        policy=spec.name,
        replications=replications,
        mean_post_init_regret=float(total_post / replications),
        std_error=std_error,
        mean_full_regret=float(pulls.sum(axis=0) @ gaps / replications),
        mean_pulls=pulls.mean(axis=0),
        mean_regret_curve=curve_counts @ gaps / replications,
        post_init_regrets=post,
    )
