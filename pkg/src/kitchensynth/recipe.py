"""Recipes, sub-task expansion, the task pool and the agent state machine."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .geometry import CounterKind, Point2


class Component(Enum):
    BUN = "Bun"
    MEAT = "Meat"
    TOMATO = "Tomato"
    LETTUCE = "Lettuce"
    CHEESE = "Cheese"


_COMPONENT_COUNTER = {
    Component.BUN: CounterKind.BUN,
    Component.MEAT: CounterKind.MEAT,
    Component.TOMATO: CounterKind.TOMATO,
    Component.LETTUCE: CounterKind.LETTUCE,
    Component.CHEESE: CounterKind.CHEESE,
}

_TOPPINGS = (Component.TOMATO, Component.LETTUCE, Component.CHEESE)


class InvalidRecipeError(ValueError):
    pass


class ProtocolError(RuntimeError):
    """An illegal (mode, event) pair reached the agent state machine."""


@dataclass(frozen=True)
class DwellTimes:
    """Seconds spent stationary per counter operation."""

    cook: float = 12.0
    chop: float = 6.0
    pickup: float = 1.0
    place: float = 1.0


@dataclass(frozen=True)
class Recipe:
    dish_id: str
    components: tuple[Component, ...]
    submission_counter: CounterKind = CounterKind.PLATE

    def __post_init__(self):
        if Component.BUN not in self.components:
            raise InvalidRecipeError(f"recipe {self.dish_id}: a bun is required")
        if len(set(self.components)) != len(self.components):
            raise InvalidRecipeError(f"recipe {self.dish_id}: duplicate components")
        if self.submission_counter not in (CounterKind.PLATE, CounterKind.PLAIN):
            raise InvalidRecipeError(
                f"recipe {self.dish_id}: submission counter must be Plate or Plain")


@dataclass(frozen=True)
class SubTask:
    id: str
    dish: str
    visits: tuple[tuple[CounterKind, float], ...]  # (counter kind, dwell seconds)
    prerequisites: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.visits:
            raise ValueError(f"sub-task {self.id}: visits must be non-empty")
        if any(d < 0 for _, d in self.visits):
            raise ValueError(f"sub-task {self.id}: dwell must be >= 0")


def expand_recipes(recipes: list[Recipe],
                   dwell: DwellTimes = DwellTimes()) -> list[SubTask]:
    """Expand dishes into sub-tasks with counter-visit sequences.

    Per dish: a bun sub-task, a meat sub-task (when meat is present, via the
    stove), and one sub-task per topping (via the cutting board). Every
    non-bun sub-task of a dish requires that dish's bun sub-task first.
    """
    subtasks: list[SubTask] = []
    for idx, r in enumerate(recipes, start=1):
        sub = r.submission_counter
        bun_id = f"bun-{idx}"
        subtasks.append(SubTask(
            id=bun_id, dish=r.dish_id,
            visits=((CounterKind.BUN, dwell.pickup), (sub, dwell.place))))
        if Component.MEAT in r.components:
            subtasks.append(SubTask(
                id=f"meat-{idx}", dish=r.dish_id,
                visits=((CounterKind.MEAT, dwell.pickup),
                        (CounterKind.STOVE, dwell.cook),
                        (sub, dwell.place)),
                prerequisites=frozenset({bun_id})))
        for comp in _TOPPINGS:
            if comp in r.components:
                subtasks.append(SubTask(
                    id=f"{comp.value.lower()}-{idx}", dish=r.dish_id,
                    visits=((_COMPONENT_COUNTER[comp], dwell.pickup),
                            (CounterKind.CUTTING_BOARD, dwell.chop),
                            (sub, dwell.place)),
                    prerequisites=frozenset({bun_id})))
    return subtasks


class Agent(Enum):
    HUMAN = "human"
    ROBOT = "robot"


@dataclass
class TaskPool:
    all: list[SubTask]
    completed: set[str] = field(default_factory=set)
    claimed: dict[str, Agent] = field(default_factory=dict)

    def by_id(self, sid: str) -> SubTask:
        for s in self.all:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def claimable(self) -> list[SubTask]:
        return [s for s in self.all
                if s.id not in self.claimed and s.id not in self.completed
                and s.prerequisites <= self.completed]

    def unclaimed(self) -> list[SubTask]:
        return [s for s in self.all
                if s.id not in self.claimed and s.id not in self.completed]

    def all_completed(self) -> bool:
        return self.completed == {s.id for s in self.all}


def next_sub_task(pool: TaskPool, agent: Agent,
                  rng: random.Random) -> Optional[SubTask]:
    """Claim a uniformly random sub-task whose prerequisites are done."""
    options = pool.claimable()
    if not options:
        return None
    chosen = rng.choice(options)
    pool.claimed[chosen.id] = agent
    return chosen


class Mode(Enum):
    MOVING = "Moving"
    DOING_AT_COUNTER = "DoingAtCounter"
    NEED_NEW_TASK = "NeedNewTask"
    IDLE = "Idle"


class Event(Enum):
    ARRIVED_AT_COUNTER = "ArrivedAtCounter"
    DWELL_DONE = "DwellDone"
    PATH_DONE = "PathDone"
    TASK_ASSIGNED = "TaskAssigned"
    NO_TASK_AVAILABLE = "NoTaskAvailable"


@dataclass(frozen=True)
class AgentState:
    agent: Agent
    mode: Mode
    pose: Point2
    clock: float = 0.0
    current_sub_task: Optional[str] = None
    visits_left: int = 0


def fsm_step(state: AgentState, event: Event, *,
             sub_task: Optional[SubTask] = None) -> AgentState:
    """Advance the four-state agent machine by one event.

    Transitions: NeedNewTask+TaskAssigned -> Moving, NeedNewTask+NoTaskAvailable
    -> Idle, Moving+ArrivedAtCounter -> DoingAtCounter, DoingAtCounter+DwellDone
    -> Moving (more visits) or NeedNewTask (exhausted). Anything else is a
    simulator bug.
    """
    m, e = state.mode, event
    if m == Mode.NEED_NEW_TASK and e == Event.TASK_ASSIGNED:
        if sub_task is None:
            raise ProtocolError("TaskAssigned without a sub-task")
        return replace(state, mode=Mode.MOVING, current_sub_task=sub_task.id,
                       visits_left=len(sub_task.visits))
    if m == Mode.NEED_NEW_TASK and e == Event.NO_TASK_AVAILABLE:
        return replace(state, mode=Mode.IDLE, current_sub_task=None)
    if m == Mode.MOVING and e == Event.ARRIVED_AT_COUNTER:
        return replace(state, mode=Mode.DOING_AT_COUNTER)
    if m == Mode.DOING_AT_COUNTER and e == Event.DWELL_DONE:
        left = state.visits_left - 1
        if left > 0:
            return replace(state, mode=Mode.MOVING, visits_left=left)
        return replace(state, mode=Mode.NEED_NEW_TASK, current_sub_task=None,
                       visits_left=0)
    raise ProtocolError(f"illegal transition: {m.value} + {e.value}")


class Verb(Enum):
    GO_TO = "GoTo"
    PICK_UP = "PickUp"
    OPERATE = "Operate"
    PLACE = "Place"


@dataclass(frozen=True)
class ActionSequence:
    sub_task_id: str
    actions: tuple[tuple[Verb, CounterKind, float], ...]


def to_action_sequence(sub_task: SubTask) -> ActionSequence:
    """Flatten a sub-task into the static action list an agent would execute.

    GoTo precedes every visit; the first visit picks up, dwelling intermediate
    visits operate, and the final visit places.
    """
    actions: list[tuple[Verb, CounterKind, float]] = []
    last = len(sub_task.visits) - 1
    for i, (kind, dwell) in enumerate(sub_task.visits):
        actions.append((Verb.GO_TO, kind, 0.0))
        if i == last:
            verb = Verb.PLACE
        elif i == 0:
            verb = Verb.PICK_UP
        else:
            verb = Verb.OPERATE
        actions.append((verb, kind, dwell))
    return ActionSequence(sub_task.id, tuple(actions))
