"""Schedule construction as a sequential decision process.

A state is a partial schedule plus dispatching bookkeeping. An action is a
dispatching rule (optionally paired with a gap percentage) and applying it
schedules either one operation or one whole job:

====  =========================================================
type  effect
====  =========================================================
1     append the rule's ready operation to its machine
2     append every operation of the rule's job, in job order
3     insert the rule's ready operation into the first idle gap
      whose usable length is at least ``p`` times its duration
4     like 3, for every operation of the rule's job
====  =========================================================

Only terminal states are rewarded, with the normalised weighted completion
time. ``preset`` builds the named environments used in the experiments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from mcts_jssp.dispatch import (
    DispatchState,
    JobRule,
    OpRule,
    Rule,
    parse_rule,
    select_job,
    select_operation,
)
from mcts_jssp.instance import Instance
from mcts_jssp.schedule import (
    PartialSchedule,
    RelativeSchedule,
    normalized_reward,
    reward_bounds,
)


class EnvError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScheduleOp:
    rule: OpRule

    def __str__(self):
        return self.rule.value


@dataclass(frozen=True)
class ScheduleJob:
    rule: JobRule

    def __str__(self):
        return self.rule.value


@dataclass(frozen=True)
class ScheduleOpGap:
    rule: OpRule
    p: Fraction

    def __str__(self):
        return f"{self.rule.value}@{float(self.p):g}"


@dataclass(frozen=True)
class ScheduleJobGap:
    rule: JobRule
    p: Fraction

    def __str__(self):
        return f"{self.rule.value}@{float(self.p):g}"


EnvAction = ScheduleOp | ScheduleJob | ScheduleOpGap | ScheduleJobGap


def _as_percent(p) -> Fraction:
    if isinstance(p, float):
        p = str(p)
    return Fraction(p)


@dataclass(frozen=True)
class EnvConfig:
    state_repr: str
    action_type: int
    rules: tuple[Rule, ...]
    percents: tuple[Fraction, ...] = ()
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "percents", tuple(_as_percent(p) for p in self.percents))
        if self.state_repr not in ("absolute", "relative"):
            raise ValueError(f"state_repr must be 'absolute' or 'relative', got {self.state_repr!r}")
        if self.action_type not in (1, 2, 3, 4):
            raise ValueError(f"action_type must be 1..4, got {self.action_type!r}")
        if not self.rules:
            raise ValueError("at least one dispatching rule is required")
        level = OpRule if self.action_type in (1, 3) else JobRule
        for rule in self.rules:
            if not isinstance(rule, level):
                raise ValueError(f"action type {self.action_type} needs {level.__name__} rules, got {rule}")
        if self.action_type in (3, 4):
            if not self.percents:
                raise ValueError("gap-insertion actions need a nonempty percent set")
            if any(not 0 < p <= 1 for p in self.percents):
                raise ValueError("percents must lie in (0, 1]")
            if self.state_repr != "relative":
                raise ValueError("gap insertion requires the relative state representation")
        elif self.percents:
            raise ValueError("action types 1 and 2 take no percents")

    @property
    def expensive(self) -> bool:
        return self.action_type == 3

    def actions(self) -> list[EnvAction]:
        kind = {1: ScheduleOp, 2: ScheduleJob}.get(self.action_type)
        if kind is not None:
            return [kind(rule) for rule in self.rules]
        kind = ScheduleOpGap if self.action_type == 3 else ScheduleJobGap
        return [kind(rule, p) for rule in self.rules for p in self.percents]

    def to_dict(self) -> dict:
        return {
            "state_repr": self.state_repr,
            "action_type": self.action_type,
            "rules": [r.value for r in self.rules],
            "percents": [str(p) for p in self.percents],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> EnvConfig:
        action_type = int(doc["action_type"])
        level = "op" if action_type in (1, 3) else "job"
        return cls(
            state_repr=doc.get("state_repr", "relative" if action_type in (3, 4) else "absolute"),
            action_type=action_type,
            rules=tuple(parse_rule(r, level) for r in doc["rules"]),
            percents=tuple(doc.get("percents", ())),
            name=doc.get("name"),
        )


_WIDE = ("0.6", "0.8", "1.0")
_NARROW = ("0.3", "0.6", "0.8")

_PRESET_TABLE = {
    "1.1": ("absolute", 1, "FIFO LWR MWR", ()),
    "1.2": ("absolute", 1, "FIFO LOR MOR", ()),
    "1.3": ("absolute", 1, "FIFO SPT LPT", ()),
    "1.4": ("absolute", 1, "LWR LOR SPT", ()),
    "2.1": ("absolute", 2, "FIFO SJF LJF", ()),
    "2.2": ("absolute", 2, "FIFO LWF MWF", ()),
    "2.3": ("absolute", 2, "FIFO SJF LWF", ()),
    # no published rule set; kept constructible but impractical at scale
    "3": ("relative", 3, "FIFO", _NARROW),
    "4.1": ("relative", 4, "LWF", _WIDE),
    "4.2": ("relative", 4, "LWF", _NARROW),
    "4.3": ("relative", 4, "MWF", _WIDE),
    "4.4": ("relative", 4, "MWF", _NARROW),
    "4.5": ("relative", 4, "SJF", _WIDE),
    "4.6": ("relative", 4, "SJF", _NARROW),
    "4.7": ("relative", 4, "LJF", _WIDE),
    "4.8": ("relative", 4, "LJF", _NARROW),
    "5.1": ("relative", 4, "LWF MWF", _WIDE),
    "5.2": ("relative", 4, "LWF MWF", _NARROW),
    "5.3": ("relative", 4, "SJF LJF", _WIDE),
    "5.4": ("relative", 4, "SJF LJF", _NARROW),
    "5.5": ("relative", 4, "LWF SJF", _WIDE),
    "5.6": ("relative", 4, "LWF SJF", _NARROW),
}

PRESET_NAMES = tuple(_PRESET_TABLE)


def preset(name: str) -> EnvConfig:
    key = name.removeprefix("Type").strip()
    try:
        state_repr, action_type, rules, percents = _PRESET_TABLE[key]
    except KeyError:
        raise KeyError(f"unknown environment preset {name!r}; choose from {', '.join(PRESET_NAMES)}") from None
    level = "op" if action_type in (1, 3) else "job"
    return EnvConfig(
        state_repr=state_repr,
        action_type=action_type,
        rules=tuple(parse_rule(r, level) for r in rules.split()),
        percents=percents,
        name=key,
    )


def load_env_config(spec: str) -> EnvConfig:
    """Resolve a preset name or a path to a JSON environment config."""
    if spec.removeprefix("Type").strip() in _PRESET_TABLE:
        return preset(spec)
    with open(spec, encoding="utf-8") as fh:
        return EnvConfig.from_dict(json.load(fh))


@dataclass
class EnvState:
    schedule: PartialSchedule
    dispatch: DispatchState
    t: int = 0

    def copy(self) -> EnvState:
        return EnvState(self.schedule.copy(), self.dispatch.copy(), self.t)

    def relative(self) -> RelativeSchedule:
        return self.schedule.relative()


def is_terminal(state: EnvState) -> bool:
    return state.schedule.count == state.schedule.inst.op_count


def _percent_ratio(p: Fraction) -> tuple[int, int]:
    return p.numerator, p.denominator


def gap_insert(rel: RelativeSchedule, op: int, p, inst: Instance) -> RelativeSchedule:
    """Place ``op`` in the first idle gap on its machine that can hold ``p`` of its duration.

    Gap length is measured from the later of the gap start and the time the
    operation's job predecessor completes. The open interval after the last
    operation always qualifies, so this falls back to appending.
    """
    p = _as_percent(p)
    if not 0 < p <= 1:
        raise ValueError(f"percent must lie in (0, 1], got {p}")
    sched = PartialSchedule.from_relative(rel, inst)
    if sched.start[op] >= 0:
        raise EnvError(f"operation {op} is already scheduled")
    pos = sched.find_gap(op, *_percent_ratio(p))
    sched.insert_before(op, pos)
    return sched.relative()


@dataclass
class JobShopEnv:
    """An instance paired with an environment configuration."""

    inst: Instance
    cfg: EnvConfig
    actions: list[EnvAction] = field(init=False)

    def __post_init__(self):
        self.actions = self.cfg.actions()
        self._action_set = set(self.actions)
        self._bounds = reward_bounds(self.inst)
        self._ratios = {a: _percent_ratio(a.p) for a in self.actions if hasattr(a, "p")}
        self._initial = EnvState(PartialSchedule(self.inst), DispatchState(self.inst))

    @property
    def bounds(self):
        return self._bounds

    @property
    def episode_length(self) -> int:
        if self.cfg.action_type in (1, 3):
            return self.inst.op_count
        return self.inst.job_count

    def reset(self) -> EnvState:
        return self._initial.copy()

    def is_terminal(self, state: EnvState) -> bool:
        return state.schedule.count == self.inst.op_count

    def legal_actions(self, state: EnvState) -> list[EnvAction]:
        if self.is_terminal(state):
            raise EnvError("no actions in a terminal state")
        return list(self.actions)

    def step(self, state: EnvState, action: EnvAction) -> EnvState:
        nxt = state.copy()
        self.apply(nxt, action)
        return nxt

    def apply(self, state: EnvState, action: EnvAction) -> None:
        """In-place version of ``step``."""
        if action not in self._action_set:
            raise EnvError(f"action {action} is not part of this environment")
        if self.is_terminal(state):
            raise EnvError("cannot step from a terminal state")
        self._do(state, action)

    def _do(self, state: EnvState, action: EnvAction) -> None:
        sched, disp = state.schedule, state.dispatch
        kind = type(action)
        if kind is ScheduleOp:
            op = select_operation(disp, action.rule)
            sched.append(op)
            disp.mark_scheduled(op)
        elif kind is ScheduleOpGap:
            op = select_operation(disp, action.rule)
            sched.insert_before(op, sched.find_gap(op, *self._ratios[action]))
            disp.mark_scheduled(op)
        else:
            j = select_job(disp, action.rule)
            first = self.inst.job_offset[j]
            ops = range(first, first + self.inst.job_size[j])
            if kind is ScheduleJob:
                for op in ops:
                    sched.append(op)
                    disp.mark_scheduled(op)
            else:
                num, den = self._ratios[action]
                for op in ops:
                    sched.insert_before(op, sched.find_gap(op, num, den))
                    disp.mark_scheduled(op)
        state.t += 1

    def objective(self, state: EnvState):
        return state.schedule.objective()

    def terminal_reward(self, state: EnvState) -> Fraction:
        if not self.is_terminal(state):
            raise EnvError("reward is only defined for terminal states")
        return normalized_reward(state.schedule.objective(), *self._bounds)
