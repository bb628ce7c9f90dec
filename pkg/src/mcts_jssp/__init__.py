"""Monte-Carlo tree search for job-shop scheduling with recirculation.

Minimises the weighted sum of job completion times. See ``mcts_jssp.mcts.search``
for the solver and ``mcts_jssp.env.preset`` for the named environments.
"""

from mcts_jssp.dispatch import JobRule, OpRule, greedy_dispatch
from mcts_jssp.env import EnvConfig, JobShopEnv, preset
from mcts_jssp.generator import default_config, generate, generate_suite
from mcts_jssp.instance import Instance, load_instance, make_instance, parse_instance, serialize_instance
from mcts_jssp.mcts import SearchConfig, SearchResult, search
from mcts_jssp.oracle import oracle_exact
from mcts_jssp.schedule import (
    AbsoluteSchedule,
    RelativeSchedule,
    compute_times,
    normalized_reward,
    objective_weighted_completion,
    reward_bounds,
    to_relative,
)

__all__ = [
    "AbsoluteSchedule",
    "EnvConfig",
    "Instance",
    "JobRule",
    "JobShopEnv",
    "OpRule",
    "RelativeSchedule",
    "SearchConfig",
    "SearchResult",
    "compute_times",
    "default_config",
    "generate",
    "generate_suite",
    "greedy_dispatch",
    "load_instance",
    "make_instance",
    "normalized_reward",
    "objective_weighted_completion",
    "oracle_exact",
    "parse_instance",
    "preset",
    "reward_bounds",
    "search",
    "serialize_instance",
    "to_relative",
]
