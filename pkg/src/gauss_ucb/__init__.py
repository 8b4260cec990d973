"""Finite-horizon UCB policies for Gaussian bandits: simulation, regret bounds
and boundary-crossing checks."""

from .exploration import ExplorationLevel, LevelMethod, fixed_level, optimal_level, sqrt_two_log_level
from .policies import PolicyKind, PolicySpec, PolicyState, constant_ucb, follow_the_leader, kl_ucb_gauss, lai_ucb, ucb1
from .simulator import BanditInstance, run_episode, run_replications

__all__ = [
    "BanditInstance",
    "ExplorationLevel",
    "LevelMethod",
    "PolicyKind",
    "PolicySpec",
    "PolicyState",
    "constant_ucb",
    "fixed_level",
    "follow_the_leader",
    "kl_ucb_gauss",
    "lai_ucb",
    "optimal_level",
    "run_episode",
    "run_replications",
    "sqrt_two_log_level",
    "ucb1",
]
