"""UCT search over schedule-construction environments.

One iteration is: select a path by UCB through fully expanded nodes, expand
one untried action, run ``rollouts`` uniform-random completions from the new
node, and back up their mean normalised reward. Every ``advance_period``
iterations the root is committed to its best child, so the search walks down
the episode instead of spreading thin over a huge tree.

The returned solution is the best complete schedule seen in any rollout.

Random numbers are drawn from a single ``random.Random(seed)`` in this order:
UCB tie-breaks during selection (only when ties occur), then one uniform
action choice per rollout step.
"""

from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from mcts_jssp.env import EnvAction, EnvConfig, EnvState, JobShopEnv
from mcts_jssp.instance import Instance
from mcts_jssp.schedule import AbsoluteSchedule, PartialSchedule, normalized_reward

log = logging.getLogger(__name__)


class SearchError(RuntimeError):
    pass


class SearchNode:
    __slots__ = ("action", "parent", "children", "untried", "visits", "total", "state", "depth")

    def __init__(self, state: EnvState | None, untried: list, action=None, parent=None, depth=0):
        self.action = action
        self.parent = parent
        self.children: list[SearchNode] = []
        self.untried = untried
        self.visits = 0
        self.total = 0.0
        self.state = state
        self.depth = depth

    @property
    def mean(self) -> float:
        return self.total / self.visits if self.visits else 0.0

    @property
    def fully_expanded(self) -> bool:
        return not self.untried

    @property
    def terminal(self) -> bool:
        return not self.untried and not self.children

    def __repr__(self):
        return f"SearchNode({self.action}, n={self.visits}, mean={self.mean:.4f})"


@dataclass(frozen=True)
class SearchConfig:
    c: float = 0.7
    rollouts: int = 30
    advance_period: int = 6
    iterations: int | None = None
    time_limit: float | None = None
    seed: int = 0
    # "mean": back up the mean of the rollouts once; "each": back up every rollout
    backprop: str = "mean"

    def __post_init__(self):
        if self.iterations is None and self.time_limit is None:
            raise ValueError("set an iteration budget, a time limit, or both")
        if self.c < 0:
            raise ValueError("exploration constant must be nonnegative")
        if self.rollouts < 1 or self.advance_period < 1:
            raise ValueError("rollouts and advance_period must be positive")
        if self.iterations is not None and self.iterations < 0:
            raise ValueError("iteration budget must be nonnegative")
        if self.backprop not in ("mean", "each"):
            raise ValueError("backprop must be 'mean' or 'each'")


@dataclass
class SearchResult:
    objective: int | Fraction
    normalized_reward: Fraction
    schedule: AbsoluteSchedule
    iterations: int
    nodes: int
    trace: list[tuple[str, float]]
    incumbent_history: list = field(repr=False)
    wall_time_ms: float = field(default=0.0, compare=False)
    root: SearchNode | None = field(default=None, compare=False, repr=False)


@dataclass
class Simulation:
    mean: float
    rewards: list[Fraction]
    best_objective: int | Fraction
    best_schedule: PartialSchedule


def ucb_value(child: SearchNode, parent_visits: int, c: float) -> float:
    if child.visits < 1 or parent_visits < 1:
        raise SearchError("UCB is undefined for unvisited nodes")
    return child.total / child.visits + c * math.sqrt(math.log(parent_visits) / child.visits)


def _best_child(node: SearchNode, c: float, rng: random.Random) -> SearchNode:
    log_n = math.log(node.visits)
    best, best_val = [], -math.inf
    for child in node.children:
        val = child.total / child.visits + c * math.sqrt(log_n / child.visits)
        if val > best_val:
            best, best_val = [child], val
        elif val == best_val:
            best.append(child)
    return best[0] if len(best) == 1 else rng.choice(best)


def select(root: SearchNode, c: float, rng: random.Random) -> list[SearchNode]:
    """Descend by UCB until a node with untried actions or a terminal node."""
    path = [root]
    node = root
    while not node.untried and node.children:
        node = _best_child(node, c, rng)
        path.append(node)
    return path


def expand(node: SearchNode, env: JobShopEnv, rng: random.Random | None = None) -> SearchNode:
    """Create the child for the next untried action, in action order."""
    if not node.untried:
        raise SearchError("node has no untried actions")
    action = node.untried.pop(0)
    state = env.step(node.state, action)
    untried = [] if env.is_terminal(state) else env.legal_actions(state)
    child = SearchNode(state, untried, action, node, node.depth + 1)
    node.children.append(child)
    if not node.untried:
        # children now carry everything the subtree needs
        node.state = None
    return child


def simulate(state: EnvState, k: int, env: JobShopEnv, rng: random.Random) -> Simulation:
    """Mean normalised reward of ``k`` uniform-random rollouts from ``state``."""
    if env.is_terminal(state):
        reward = env.terminal_reward(state)
        return Simulation(float(reward), [reward], state.schedule.objective(), state.schedule)
    actions = env.actions
    n_actions = len(actions)
    do = env._do
    rewards = []
    best_obj, best_sched = None, None
    for _ in range(k):
        s = state.copy()
        sched = s.schedule
        target = env.inst.op_count
        while sched.count < target:
            do(s, actions[rng.randrange(n_actions)])
        obj = sched.objective()
        rewards.append(env.terminal_reward(s))
        if best_obj is None or obj < best_obj:
            best_obj, best_sched = obj, sched
    return Simulation(float(sum(rewards) / k), rewards, best_obj, best_sched)


def backpropagate(path: list[SearchNode], reward, count: int = 1) -> None:
    """Add ``count`` visits and ``reward`` (the summed reward) to every node on the path."""
    if not 0 <= reward <= count:
        raise AssertionError(f"reward {reward} outside [0, {count}]")
    reward = float(reward)
    for node in path:
        node.visits += count
        node.total += reward


def advance_root(root: SearchNode) -> tuple[EnvAction, SearchNode]:
    """Commit to the child with the best mean (ties: more visits, then action order)."""
    if root.untried or not root.children:
        raise SearchError("root is not fully expanded")
    if any(child.visits == 0 for child in root.children):
        raise SearchError("root has unvisited children")
    best = root.children[0]
    for child in root.children[1:]:
        if (child.mean, child.visits) > (best.mean, best.visits):
            best = child
    best.parent = None
    return best.action, best


def _ready_to_advance(root: SearchNode) -> bool:
    return not root.untried and bool(root.children) and all(ch.visits for ch in root.children)


def search(inst: Instance, env_cfg: EnvConfig, search_cfg: SearchConfig) -> SearchResult:
    t0 = time.perf_counter()
    deadline = None if search_cfg.time_limit is None else t0 + search_cfg.time_limit
    budget = search_cfg.iterations
    k, c, period = search_cfg.rollouts, search_cfg.c, search_cfg.advance_period
    rng = random.Random(search_cfg.seed)
    env = JobShopEnv(inst, env_cfg)

    state = env.reset()
    root = SearchNode(state, [] if env.is_terminal(state) else env.legal_actions(state))
    nodes = 1

    def back_up(path, sim):
        if search_cfg.backprop == "mean":
            backpropagate(path, sim.mean)
        else:
            backpropagate(path, sum(sim.rewards), len(sim.rewards))

    sim = simulate(root.state, k, env, rng)
    back_up([root], sim)
    best_obj, best_sched = sim.best_objective, sim.best_schedule.copy()
    history = []
    trace: list[tuple[str, float]] = []
    iterations = since_advance = 0

    while not root.terminal:
        if budget is not None and iterations >= budget:
            break
        if deadline is not None and time.perf_counter() >= deadline:
            break
        path = select(root, c, rng)
        leaf = path[-1]
        if leaf.untried:
            leaf = expand(leaf, env, rng)
            path.append(leaf)
            nodes += 1
        sim = simulate(leaf.state, k, env, rng)
        back_up(path, sim)
        if sim.best_objective < best_obj:
            best_obj, best_sched = sim.best_objective, sim.best_schedule.copy()
        iterations += 1
        since_advance += 1
        history.append(best_obj)
        if since_advance >= period and _ready_to_advance(root):
            action, root = advance_root(root)
            trace.append((str(action), root.mean))
            since_advance = 0
            log.debug("iter %d: advanced to depth %d via %s (mean %.4f)", iterations, root.depth, action, root.mean)

    schedule = best_sched.absolute()
    return SearchResult(
        objective=best_obj,
        normalized_reward=normalized_reward(best_obj, *env.bounds),
        schedule=schedule,
        iterations=iterations,
        nodes=nodes,
        trace=trace,
        incumbent_history=history,
        wall_time_ms=(time.perf_counter() - t0) * 1000.0,
        root=root,
    )
