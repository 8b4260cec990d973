"""UCB-style index policies for Gaussian bandits.

Arms are indexed from 0.  Every policy pulls arms 0, ..., K-1 once in that
order, then picks the arm with the largest index, ties going to the lowest
arm number.  The index is ``mean + bonus(pulls, t)``; the bonus functions
below are shared by the single-episode :class:`PolicyState` and the
vectorised simulator so that both routes make identical choices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .exploration import ExplorationLevel, LevelMethod, log_plus


class PolicyKind(str, enum.Enum):
    CONSTANT_UCB = "constant_ucb"
    LAI_UCB = "lai_ucb"
    UCB1 = "ucb1"
    KL_UCB_GAUSS = "kl_ucb_gauss"
    FOLLOW_THE_LEADER = "follow_the_leader"


@dataclass(frozen=True)
class PolicySpec:
    """Which index rule to run, with the prespecified noise level ``sigma``.

    ``level`` is required for CONSTANT_UCB; ``alpha`` is only read by UCB1.
    """

    kind: PolicyKind
    horizon: int
    sigma: float = 1.0
    level: ExplorationLevel | None = None
    alpha: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if not self.sigma > 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.horizon < 3:
            raise ValueError(f"horizon must be at least 3, got {self.horizon}")
        if self.kind is PolicyKind.CONSTANT_UCB and self.level is None:
            raise ValueError("constant_ucb needs an exploration level")
        if self.kind is PolicyKind.UCB1 and not self.alpha > 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    @property
    def name(self) -> str:
        if self.kind is PolicyKind.CONSTANT_UCB:
            return f"constant_ucb[{self.level.method.value},b={self.level.b:.6g}]"
        if self.kind is PolicyKind.UCB1:
            return f"ucb1[alpha={self.alpha:g}]"
        return self.kind.value

    def check_arms(self, n_arms: int) -> None:
        if n_arms < 2:
            raise ValueError(f"need at least 2 arms, got {n_arms}")
        if self.horizon < n_arms + 1:
            raise ValueError(f"horizon {self.horizon} must be at least n_arms + 1 = {n_arms + 1}")
        if self.kind is PolicyKind.CONSTANT_UCB and self.level.method is not LevelMethod.FIXED:
            expected = self.horizon - n_arms
            if self.level.horizon_after_init != expected:
                raise ValueError(
                    f"level was built for T'={self.level.horizon_after_init}, "
                    f"but horizon {self.horizon} with {n_arms} arms gives T'={expected}"
                )


def constant_ucb(level: ExplorationLevel, horizon: int, sigma: float = 1.0) -> PolicySpec:
    return PolicySpec(PolicyKind.CONSTANT_UCB, horizon, sigma, level=level)


def lai_ucb(horizon: int, sigma: float = 1.0) -> PolicySpec:
    return PolicySpec(PolicyKind.LAI_UCB, horizon, sigma)


def ucb1(horizon: int, alpha: float = 2.0, sigma: float = 1.0) -> PolicySpec:
    return PolicySpec(PolicyKind.UCB1, horizon, sigma, alpha=alpha)


def kl_ucb_gauss(horizon: int, sigma: float = 1.0) -> PolicySpec:
    return PolicySpec(PolicyKind.KL_UCB_GAUSS, horizon, sigma)


def follow_the_leader(horizon: int, sigma: float = 1.0) -> PolicySpec:
    return PolicySpec(PolicyKind.FOLLOW_THE_LEADER, horizon, sigma)


# -- per-arm index formulas ---------------------------------------------------


def _check_pulls(pulls: int) -> None:
    if pulls < 1:
        raise ValueError("index is undefined before the arm has been pulled")


def index_constant(mean: float, pulls: int, sigma: float, b: float) -> float:
    _check_pulls(pulls)
    return mean + sigma * b / math.sqrt(pulls)


def index_lai(mean: float, pulls: int, sigma: float, horizon_after_init: int) -> float:
    _check_pulls(pulls)
    return mean + sigma * math.sqrt(2.0 * log_plus(horizon_after_init / pulls) / pulls)


def index_ucb1(mean: float, pulls: int, t: int, alpha: float) -> float:
    _check_pulls(pulls)
    if t < 2:
        raise ValueError(f"UCB1 needs t >= 2, got {t}")
    return mean + math.sqrt(alpha * math.log(t) / pulls)


def klucb_exploration(t: int) -> float:
    """log t + 3 log log t."""
    if t < 3:
        raise ValueError(f"kl-UCB exploration needs t >= 3, got {t}")
    lt = math.log(t)
    return lt + 3.0 * math.log(lt)


def index_klucb_gauss(mean: float, pulls: int, t: int, sigma: float) -> float:
    """Largest theta >= mean with pulls * KL(mean, theta) <= log t + 3 log log t.

    For equal-variance Gaussians the KL ball inverts in closed form.
    """
    _check_pulls(pulls)
    return mean + sigma * math.sqrt(2.0 * klucb_exploration(t) / pulls)


# -- vectorised bonuses ---------------------------------------------------------


class BonusRule:
    """Exploration bonus of a policy as a function of (pulls, t).

    Bonuses that depend only on the pull count are tabulated once, which
    keeps the simulator's choices identical however replications are batched.
    """

    def __init__(self, spec: PolicySpec, n_arms: int):
        spec.check_arms(n_arms)
        self.spec = spec
        self.n_arms = n_arms
        self.horizon_after_init = spec.horizon - n_arms
        n = np.arange(spec.horizon + 1, dtype=float)
        n[0] = 1.0  # placeholder, never read after initialisation
        kind = spec.kind
        if kind is PolicyKind.CONSTANT_UCB:
            self._table = spec.sigma * spec.level.b / np.sqrt(n)
        elif kind is PolicyKind.LAI_UCB:
            lp = np.maximum(1.0, np.log(self.horizon_after_init / n))
            self._table = spec.sigma * np.sqrt(2.0 * lp / n)
        elif kind is PolicyKind.FOLLOW_THE_LEADER:
            self._table = np.zeros_like(n)
        else:
            self._table = None

    def __call__(self, pulls: np.ndarray, t: int) -> np.ndarray:
        """Bonus for arms with the given pull counts when choosing the arm for round ``t`` (1-based)."""
        if self._table is not None:
            return self._table[pulls]
        if self.spec.kind is PolicyKind.UCB1:
            scale = self.spec.alpha * math.log(t)
        else:
            scale = 2.0 * self.spec.sigma**2 * klucb_exploration(t)
        return np.sqrt(scale / pulls)


# -- single-episode state -------------------------------------------------------------


@dataclass
class ArmStatistics:
    pulls: int
    mean: float
    sum: float


@dataclass
class PolicyState:
    """Running per-arm statistics of one episode.

    ``time`` counts completed rounds; the next call to :meth:`select_arm`
    chooses the arm for round ``time + 1``.
    """

    spec: PolicySpec
    n_arms: int
    time: int = 0
    pulls: np.ndarray = field(init=False)
    means: np.ndarray = field(init=False)
    sums: np.ndarray = field(init=False)

    def __post_init__(self):
        self._bonus = BonusRule(self.spec, self.n_arms)
        self.pulls = np.zeros(self.n_arms, dtype=np.int64)
        self.means = np.zeros(self.n_arms)
        self.sums = np.zeros(self.n_arms)

    def arm(self, a: int) -> ArmStatistics:
        return ArmStatistics(int(self.pulls[a]), float(self.means[a]), float(self.sums[a]))

    def indices(self) -> np.ndarray:
        if self.time < self.n_arms:
            raise ValueError("indices are undefined during initialisation")
        return self.means + self._bonus(self.pulls, self.time + 1)

    def select_arm(self) -> int:
        if self.time >= self.spec.horizon:
            raise ValueError(f"horizon {self.spec.horizon} exhausted")
        if self.time < self.n_arms:
            return self.time
        return int(np.argmax(self.indices()))

    def update(self, arm: int, reward: float) -> PolicyState:
        if not 0 <= arm < self.n_arms:
            raise ValueError(f"arm {arm} out of range for {self.n_arms} arms")
        self.pulls[arm] += 1
        self.sums[arm] += reward
        self.means[arm] += (reward - self.means[arm]) / self.pulls[arm]
        self.time += 1
        return self
