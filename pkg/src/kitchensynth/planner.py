"""Time-parameterized RRT planning and the two-agent cooking simulation.

The human plans first and never considers the robot (prioritized,
decentralized). The robot plans against the human's committed timeline; when
a later human segment collides with the robot's in-flight path, the
simulation pauses and the robot re-plans from the pause state against the
committed human path plus a belief-derived virtual human path.

Planning keeps a safety margin above the 2-radius separation so that the
discrete node checks imply continuous separation at the nominal radius.
"""

from __future__ import annotations

import math
import random
from bisect import bisect_left, bisect_right

import numpy as np
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, NamedTuple, Optional

from .geometry import (
    CounterUnreachableError,
    CounterKind,
    Layout,
    Point2,
    clearance_checker,
    hop_checker,
    service_configuration,
    validate_layout,
)
from .recipe import (
    Agent,
    AgentState,
    Event,
    Mode,
    SubTask,
    TaskPool,
    fsm_step,
    next_sub_task,
)


class TimedNode(NamedTuple):
    q: Point2
    t: float


class PlanningFailure(RuntimeError):
    """The RRT budget was exhausted or a goal was unreachable."""


class TourFailure(RuntimeError):
    """A counter-visit tour could not be completed."""


class InvalidLayoutError(ValueError):
    pass


@dataclass(frozen=True)
class PlannerParams:
    agent_radius: float = 0.3
    speed: float = 1.0
    step_length: float = 0.3
    goal_bias: float = 0.8
    max_iterations: int = 5000
    random_extend_steps: int = 5
    wait_bias: float = 0.15       # probability of a time-only (wait) expansion
    standoff: float = 0.2
    max_replans: int = 3
    # reactive re-plans and dodges are local maneuvers; give them a smaller
    # search budget than first-time tour planning so hopeless avoidance
    # attempts fail fast instead of exhausting the full tree
    replan_iterations: int = 1500
    spawn_human: Point2 = Point2(1.0, 1.0)
    spawn_robot: Point2 = Point2(2.0, 1.0)

    @property
    def time_tol(self) -> float:
        return self.step_length / self.speed

    @property
    def separation(self) -> float:
        """Required inter-agent distance at time-matched nodes."""
        return 2.0 * self.agent_radius

    @property
    def plan_separation(self) -> float:
        """Node separation enforced while planning.

        One step of slack on top of the nominal separation makes discrete
        clearance imply continuous clearance at the nominal value (both
        agents move at most half a step per half tolerance window).
        """
        return self.separation + self.speed * self.time_tol


@dataclass
class TimedPath:
    nodes: list[TimedNode]
    agent: Agent

    @property
    def start_time(self) -> float:
        return self.nodes[0].t

    @property
    def end_time(self) -> float:
        return self.nodes[-1].t

    def length(self) -> float:
        total = 0.0
        for a, b in zip(self.nodes, self.nodes[1:]):
            total += math.hypot(b.q[0] - a.q[0], b.q[1] - a.q[1])
        return total

    def position_at(self, t: float) -> Point2:
        """Position of the last node at or before t (parked outside the span)."""
        nodes = self.nodes
        if t <= nodes[0].t:
            return nodes[0].q
        if t >= nodes[-1].t:
            return nodes[-1].q
        idx = bisect_right([n.t for n in nodes], t) - 1
        return nodes[idx].q


def _window(ts: list[float], t: float, tol: float) -> tuple[int, int]:
    """Node index window for time-matched checks.

    Nodes within tol of t. When the window falls inside a gap between
    samples (a dwell, a wait, or beyond an end) it widens to the bracketing
    nodes, which carry the parked position for that stretch.
    """
    lo = bisect_left(ts, t - tol)
    hi = bisect_right(ts, t + tol)
    if lo == hi:
        return max(0, lo - 1), min(len(ts), lo + 1)
    return lo, hi


class _ObstacleIndex:
    """Time-indexed lookup of moving-obstacle positions.

    Before a path starts the obstacle is parked at its first node. Beyond
    its last committed node the obstacle is unknown and does not constrain
    planning — collisions with a later commitment are handled reactively.
    A path whose agent genuinely stays put must say so with explicit wait
    nodes.
    """

    def __init__(self, paths: list[TimedPath], tol: float):
        self.tol = tol
        self._data = []
        for p in paths:
            if not p.nodes:
                continue
            ts = [n.t for n in p.nodes]
            qs = [n.q for n in p.nodes]
            self._data.append((ts, qs))

    def conflicts(self, x: float, y: float, t: float, sep: float) -> bool:
        sep2 = sep * sep
        tol = self.tol
        for ts, qs in self._data:
            if t > ts[-1] + tol:
                continue
            lo, hi = _window(ts, t, tol)
            for i in range(lo, hi):
                qx, qy = qs[i]
                dx, dy = qx - x, qy - y
                if dx * dx + dy * dy < sep2:
                    return True
        return False

    def min_clearance(self, x: float, y: float, t: float) -> float:
        """Distance to the closest time-matched obstacle node (inf if none)."""
        best = math.inf
        tol = self.tol
        for ts, qs in self._data:
            if t > ts[-1] + tol:
                continue
            lo, hi = _window(ts, t, tol)
            for i in range(lo, hi):
                qx, qy = qs[i]
                d = math.hypot(qx - x, qy - y)
                if d < best:
                    best = d
        return best


def sample_is_goal(rng: random.Random, goal_bias: float) -> bool:
    """The single draw that decides whether an RRT iteration samples the goal."""
    return rng.random() < goal_bias


def plan_single(layout: Layout, start: TimedNode, goal: Point2,
                moving_obstacles: list[TimedPath], rng: random.Random,
                params: PlannerParams,
                agent: Agent = Agent.HUMAN, hold: float = 0.0) -> TimedPath:
    """Goal-biased RRT over (position, time) from start to the goal position.

    Goal-directed extensions run until the first invalid configuration;
    random extensions add at most five steps. Wait expansions let an agent
    stand still while a moving obstacle passes. Every accepted node keeps
    the planning separation from all obstacles at time-matched nodes.

    With a positive hold, the goal must additionally stay conflict-free for
    hold seconds after arrival (the dwell the caller will append), so an
    agent arrives at a counter only once it can finish working there.
    """
    clear = clearance_checker(layout, params.agent_radius)
    hop = hop_checker(layout, params.agent_radius)
    sx, sy = start.q
    gx, gy = goal
    if not clear(sx, sy):
        raise PlanningFailure(f"start {start.q} is not clear")
    if not clear(gx, gy):
        raise PlanningFailure(f"goal {goal} is not clear")

    obstacles = _ObstacleIndex(moving_obstacles, params.time_tol)
    sep = params.plan_separation
    dt = params.time_tol

    def hold_clear(t_arrive: float) -> bool:
        k = 0
        while True:
            if obstacles.conflicts(gx, gy, t_arrive + k * dt, sep):
                return False
            if k * dt >= hold:
                return True
            k += 1

    t0 = start.t
    goal_eps = 1e-9
    if math.hypot(gx - sx, gy - sy) < goal_eps and hold_clear(t0):
        return TimedPath([start], agent)

    step = params.step_length
    speed = params.speed
    xmin, ymin, xmax, ymax = layout.room.bbox

    # tree nodes live in flat arrays so nearest-neighbour scans vectorize
    cap = 4096
    X = np.empty(cap)
    Y = np.empty(cap)
    T = np.empty(cap)
    # goal extension from a fixed node is deterministic, so a node that
    # yields no progress toward the goal never will; skip it from then on
    dead = np.zeros(cap, dtype=bool)
    X[0], Y[0], T[0] = sx, sy, t0
    n = 1
    parents = [-1]
    # a node closer than the planning margin to an obstacle may still grow —
    # an agent caught too close has to keep moving — but only toward children
    # that strictly increase clearance; it may never linger or land there.
    # None means the node satisfies the full margin.
    start_cl = obstacles.min_clearance(sx, sy, t0)
    viol: List[Optional[float]] = [start_cl if start_cl < sep else None]

    def admit(x: float, y: float, t: float,
              parent_viol: Optional[float]) -> tuple[bool, Optional[float]]:
        """Whether a node at (x, y, t) may be added, and its violation level."""
        cl = obstacles.min_clearance(x, y, t)
        if cl >= sep:
            return True, None
        if parent_viol is not None and cl > parent_viol + 1e-9:
            return True, cl
        return False, cl

    # wait nodes are exact (position, time) repeats; never recreate one that
    # was already added (and possibly already proven dead)
    wait_keys: set[tuple[float, float, float]] = set()

    def add_node(x: float, y: float, t: float, parent: int,
                 v: Optional[float]) -> int:
        nonlocal cap, n, X, Y, T, dead
        if n >= cap:
            cap *= 2
            X = np.concatenate([X, np.empty(len(X))])
            Y = np.concatenate([Y, np.empty(len(Y))])
            T = np.concatenate([T, np.empty(len(T))])
            dead = np.concatenate([dead, np.zeros(len(dead), dtype=bool)])
        X[n], Y[n], T[n] = x, y, t
        dead[n] = False
        parents.append(parent)
        viol.append(v)
        n += 1
        return n - 1

    def finish(i: int) -> TimedPath:
        rev = []
        while i >= 0:
            rev.append(TimedNode(Point2(float(X[i]), float(Y[i])),
                                 float(T[i])))
            i = parents[i]
        rev.reverse()
        return TimedPath(rev, agent)

    def extend(tx: float, ty: float, to_goal: bool,
               max_steps: Optional[int]) -> Optional[int]:
        """Grow toward (tx, ty); return a goal-landing node index or None.

        Nearest neighbour is Euclidean on position only. Position ties go to
        the latest node for goal extensions (so wait chains keep extending)
        but to the earliest node for exploration (the least time-constrained
        copy of that position).
        """
        d2 = (X[:n] - tx) ** 2 + (Y[:n] - ty) ** 2
        if to_goal:
            alive = ~dead[:n]
            for i in np.flatnonzero(alive & (d2 < goal_eps)):
                # a node already at the goal succeeds outright if its hold
                # window is clear; otherwise it cannot seed a goal approach
                if hold_clear(float(T[i])):
                    return int(i)
                dead[i] = True
                alive[i] = False
            d2 = np.where(alive, d2, np.inf)
        best_d = d2.min()
        if not best_d < math.inf:
            return None
        cand = np.flatnonzero(d2 == best_d)
        if len(cand) == 1:
            best_i = int(cand[0])
        else:
            tc = T[cand]
            best_i = int(cand[np.argmax(tc) if to_goal else np.argmin(tc)])

        cx, cy, ct = float(X[best_i]), float(Y[best_i]), float(T[best_i])
        cur_viol = viol[best_i]
        parent = best_i
        taken = 0
        stepped: List[int] = []
        while True:
            dx, dy = tx - cx, ty - cy
            remaining = math.hypot(dx, dy)
            if remaining < goal_eps:
                break
            if remaining <= step:
                nx, ny = tx, ty
                advance = remaining
            else:
                nx = cx + dx / remaining * step
                ny = cy + dy / remaining * step
                advance = step
            nt = ct + advance / speed
            landing = to_goal and remaining <= step
            ok, new_viol = admit(nx, ny, nt, cur_viol)
            blocked = (not clear(nx, ny)
                       or not hop(cx, cy, nx, ny)
                       or not ok
                       or (landing and new_viol is not None)
                       or (landing and hold > 0.0 and not hold_clear(nt)))
            if blocked:
                # a transiently blocked goal approach waits in place instead
                # of abandoning the extension, letting the obstacle pass
                wait_ok, wait_viol = admit(cx, cy, ct + dt, cur_viol)
                if (to_goal and clear(nx, ny) and wait_ok
                        and (cx, cy, ct + dt) not in wait_keys):
                    wait_keys.add((cx, cy, ct + dt))
                    add_node(cx, cy, ct + dt, parent, wait_viol)
                break
            parent = add_node(nx, ny, nt, parent, new_viol)
            stepped.append(parent)
            cx, cy, ct = nx, ny, nt
            cur_viol = new_viol
            if landing:
                return parent
            taken += 1
            if max_steps is not None and taken >= max_steps:
                break
        if to_goal:
            # the approach from here is deterministic, so a failed goal
            # extension dooms its seed and every step node it created; only
            # a directed wait (which shifts time) stays eligible
            dead[best_i] = True
            for i in stepped:
                dead[i] = True
        return None

    for _ in range(params.max_iterations):
        if params.wait_bias > 0.0 and rng.random() < params.wait_bias:
            i = rng.randrange(n)
            wx, wy, wt = float(X[i]), float(Y[i]), float(T[i]) + dt
            wait_ok, wait_viol = admit(wx, wy, wt, viol[i])
            if (wx, wy, wt) not in wait_keys and wait_ok:
                wait_keys.add((wx, wy, wt))
                add_node(wx, wy, wt, i, wait_viol)
            continue

        grew = n
        if sample_is_goal(rng, params.goal_bias):
            hit = extend(gx, gy, True, None)
            if hit is not None:
                return finish(hit)
        if n == grew:
            # the goal attempt (if any) went nowhere; spend the iteration
            # exploring instead of discarding it
            tx = xmin + rng.random() * (xmax - xmin)
            ty = ymin + rng.random() * (ymax - ymin)
            extend(tx, ty, False, params.random_extend_steps)

    raise PlanningFailure(
        f"no path from {start.q} to {goal} within {params.max_iterations} "
        f"iterations (tree={n}, dead={int(dead[:n].sum())}, "
        f"t_max={T[:n].max():.1f})")


@dataclass(frozen=True)
class VisitMark:
    kind: CounterKind
    counter_id: str
    arrival: float    # timestamp at the service configuration, before the dwell
    departure: float  # arrival + dwell


@dataclass
class Tour:
    path: TimedPath
    visits: list[VisitMark]


def plan_tour(layout: Layout, agent: Agent, sub_task: SubTask,
              start: TimedNode, moving_obstacles: list[TimedPath],
              rng: random.Random, params: PlannerParams,
              visits: Optional[list[tuple[CounterKind, float]]] = None) -> Tour:
    """Chain single-goal plans through a sub-task's counter visits.

    Dwell time is encoded as a repeated node at the service configuration
    with the timestamp advanced by the dwell.
    """
    if visits is None:
        visits = list(sub_task.visits)
    nodes: list[TimedNode] = [start]
    marks: list[VisitMark] = []
    cur = start
    for kind, dwell in visits:
        counters = layout.counters_of_kind(kind)
        if not counters:
            raise TourFailure(f"no counter of kind {kind.value} in layout")
        counter = counters[0]
        try:
            goal, _facing = service_configuration(
                layout, counter, params.agent_radius, params.standoff)
        except CounterUnreachableError as exc:
            raise TourFailure(str(exc)) from exc
        try:
            seg = plan_single(layout, cur, goal, moving_obstacles, rng, params,
                              agent, hold=dwell)
        except PlanningFailure as exc:
            raise TourFailure(f"segment to {counter.id} failed: {exc}") from exc
        nodes.extend(seg.nodes[1:])
        arrival = seg.nodes[-1].t
        departure = arrival + dwell
        if dwell > 0:
            nodes.append(TimedNode(seg.nodes[-1].q, departure))
        marks.append(VisitMark(kind, counter.id, arrival, departure))
        cur = nodes[-1]
    return Tour(TimedPath(nodes, agent), marks)


def _collision_pair(path_a: TimedPath, path_b: TimedPath,
                    radius: float, tol: float,
                    parked_tails: bool = True
                    ) -> Optional[tuple[float, float]]:
    """(earlier, later) node times of the first too-close time-matched pair."""
    if not path_a.nodes or not path_b.nodes:
        return None
    sep = 2.0 * radius
    best: Optional[tuple[float, float]] = None
    # keep the matching window a hair inside the planner's so rounding in
    # t +/- tol never flags a node pair the planner legitimately excluded
    tol = tol - 1e-9
    # before the later of the two start times one agent's position is not
    # described by these paths, so nothing earlier can be compared
    tmin = max(path_a.start_time, path_b.start_time) - tol
    for primary, other in ((path_a, path_b), (path_b, path_a)):
        ots = [n.t for n in other.nodes]
        oqs = [n.q for n in other.nodes]
        for q, t in primary.nodes:
            if t < tmin:
                continue
            if not parked_tails and t > ots[-1] + tol:
                continue
            lo, hi = _window(ots, t, tol)
            for i in range(lo, hi):
                ox, oy = oqs[i]
                if math.hypot(ox - q[0], oy - q[1]) < sep:
                    hit = (min(t, ots[i]), max(t, ots[i]))
                    if best is None or hit < best:
                        best = hit
    return best


def check_dynamic_collision(path_a: TimedPath, path_b: TimedPath,
                            radius: float, tol: float,
                            parked_tails: bool = True) -> Optional[float]:
    """Earliest time at which time-matched nodes come closer than 2*radius.

    With parked_tails, an agent is treated as parked at the corresponding
    terminal node outside its path's time span (the verification view).
    Without it, times beyond either path's last node are ignored (the
    planning view, where the future is not yet committed). Dwell and wait
    stretches count the same way in both views.
    """
    pair = _collision_pair(path_a, path_b, radius, tol, parked_tails)
    return None if pair is None else pair[0]


# ---------------------------------------------------------------------------
# belief over the human's next sub-task

@dataclass
class Belief:
    probs: dict[str, float]


def belief_init(pool: TaskPool) -> Belief:
    """Uniform belief over the currently claimable sub-tasks."""
    ids = [s.id for s in pool.claimable()]
    if not ids:
        return Belief({})
    p = 1.0 / len(ids)
    return Belief({sid: p for sid in ids})


def belief_update(belief: Belief, completed_id: str) -> Belief:
    """Zero out a completed sub-task and redistribute its mass uniformly."""
    if completed_id not in belief.probs:
        raise KeyError(completed_id)
    rest = {k: v for k, v in belief.probs.items() if k != completed_id}
    if not rest:
        return Belief({})
    share = belief.probs[completed_id] / len(rest)
    return Belief({k: v + share for k, v in rest.items()})


def _belief_add(belief: Belief, new_ids: list[str]) -> Belief:
    """Admit newly claimable sub-tasks with an equal share of the mass."""
    new_ids = [i for i in new_ids if i not in belief.probs]
    if not new_ids:
        return belief
    total = len(belief.probs) + len(new_ids)
    scale = len(belief.probs) / total if belief.probs else 0.0
    probs = {k: v * scale for k, v in belief.probs.items()}
    spare = 1.0 - sum(probs.values())
    share = spare / len(new_ids)
    for i in new_ids:
        probs[i] = share
    return Belief(probs)


def virtual_human_path(layout: Layout, pool: TaskPool, belief: Belief,
                       human_pose: Point2, human_clock: float,
                       rng: random.Random, params: PlannerParams) -> TimedPath:
    """Predicted human path for its most probable next sub-task.

    Ties break to the lowest sub-task id. If no prediction can be planned
    the human is modelled as parked at its current pose.
    """
    candidates = {sid: p for sid, p in belief.probs.items()
                  if sid not in pool.completed
                  and pool.claimed.get(sid) != Agent.ROBOT}
    if not candidates:
        candidates = dict(belief.probs)
    parked = TimedPath([TimedNode(human_pose, human_clock)], Agent.HUMAN)
    if not candidates:
        return parked
    best_p = max(candidates.values())
    sid = min(s for s, p in candidates.items() if p >= best_p - 1e-12)
    try:
        sub = pool.by_id(sid)
        tour = plan_tour(layout, Agent.HUMAN, sub,
                         TimedNode(human_pose, human_clock), [], rng, params)
        return tour.path
    except (TourFailure, KeyError):
        return parked


# ---------------------------------------------------------------------------
# simulation

class Policy(Enum):
    DIRECT_THEN_REACTIVE = "direct-then-reactive"
    ALWAYS_INFERENCE = "always-inference"


class SegmentKind(Enum):
    TASK = "task"
    RETREAT = "retreat"


@dataclass
class SegmentRecord:
    sub_task_id: str
    agent: Agent
    path: TimedPath
    visits: list[VisitMark]
    plan_seed: int
    start: TimedNode
    kind: SegmentKind = SegmentKind.TASK


@dataclass
class SimOutcome:
    success: bool
    segments: list[SegmentRecord] = field(default_factory=list)
    finish_times: dict[str, float] = field(default_factory=dict)
    failure_reason: Optional[str] = None
    replan_count: int = 0
    retreats: list[SegmentRecord] = field(default_factory=list)

    def paths_for(self, agent: Agent) -> list[TimedPath]:
        return [s.path for s in self.segments if s.agent == agent]

    def timeline_for(self, agent: Agent, spawn: Point2) -> TimedPath:
        """Full movement history of one agent, retreats included."""
        segs = sorted((s for s in self.segments + self.retreats
                       if s.agent == agent), key=lambda s: s.path.start_time)
        nodes: list[TimedNode] = [TimedNode(spawn, 0.0)]
        for s in segs:
            skip = 1 if s.path.nodes and s.path.nodes[0].q == nodes[-1].q else 0
            nodes.extend(s.path.nodes[skip:])
        return TimedPath(nodes, agent)


_SEED_STRIDE = 1_000_003
_PARK_FOREVER = 1e7  # timestamp for "stays here until the run ends"


@dataclass
class _AgentRec:
    state: AgentState
    base_seed: int
    seg_index: int = 0
    current: Optional[SegmentRecord] = None
    pending: Optional[tuple[float, str]] = None  # (completion time, sub-task id)
    sub_task: Optional[SubTask] = None
    timeline: Optional[TimedPath] = None
    retreated: bool = False  # the trip back to spawn is already committed


def simulate(layout: Layout, pool: TaskPool, rng: random.Random,
             params: PlannerParams,
             policy: Policy = Policy.DIRECT_THEN_REACTIVE) -> SimOutcome:
    """Run the two-agent cooking simulation on a validated layout.

    Agents claim sub-tasks in global-clock order (human wins ties). The
    human plans with no obstacles; the robot plans against the committed
    human timeline and re-plans reactively on collisions. Completion events
    apply in time order so precedence is never violated. Agents with no
    remaining work retreat to their spawn pose so they do not block the
    counters forever.
    """
    violations = validate_layout(layout)
    if violations:
        raise InvalidLayoutError(f"layout has {len(violations)} violations")

    recs = {
        Agent.HUMAN: _AgentRec(
            AgentState(Agent.HUMAN, Mode.NEED_NEW_TASK, params.spawn_human),
            base_seed=rng.getrandbits(62)),
        Agent.ROBOT: _AgentRec(
            AgentState(Agent.ROBOT, Mode.NEED_NEW_TASK, params.spawn_robot),
            base_seed=rng.getrandbits(62)),
    }
    task_rng = random.Random(rng.getrandbits(62))
    virtual_seed = rng.getrandbits(62)

    recs[Agent.HUMAN].timeline = TimedPath(
        [TimedNode(params.spawn_human, 0.0)], Agent.HUMAN)
    recs[Agent.ROBOT].timeline = TimedPath(
        [TimedNode(params.spawn_robot, 0.0)], Agent.ROBOT)

    belief = belief_init(pool)
    segments: list[SegmentRecord] = []
    retreats: list[SegmentRecord] = []
    replan_count = 0
    completion_times: dict[str, float] = {}
    tol = params.time_tol
    plan_radius = params.plan_separation / 2.0  # for margined collision checks

    def fail(reason: str) -> SimOutcome:
        return SimOutcome(False, segments, _finish_times(pool, completion_times),
                          reason, replan_count, retreats)

    def extend_timeline(agent: Agent, path: TimedPath) -> None:
        rec = recs[agent]
        nodes = rec.timeline.nodes
        while nodes and nodes[-1].t > path.start_time + 1e-12:
            nodes = nodes[:-1]  # drop a stale park-forever sentinel
        skip = 1 if path.nodes and nodes and path.nodes[0].q == nodes[-1].q else 0
        rec.timeline = TimedPath(nodes + path.nodes[skip:], agent)

    def park(agent: Agent, until: float) -> None:
        """Record that an agent stays at its last committed pose until a time."""
        rec = recs[agent]
        last = rec.timeline.nodes[-1]
        if until > last.t + 1e-12:
            rec.timeline = TimedPath(
                rec.timeline.nodes + [TimedNode(last.q, until)], agent)

    def process_completions(up_to: float) -> None:
        nonlocal belief
        while True:
            due = [(rec.pending, a) for a, rec in recs.items()
                   if rec.pending is not None and rec.pending[0] <= up_to + 1e-12]
            if not due:
                return
            (t, sid), agent = min(due, key=lambda e: e[0][0])
            recs[agent].pending = None
            before = {s.id for s in pool.claimable()}
            pool.claimed.pop(sid, None)
            pool.completed.add(sid)
            completion_times[sid] = t
            if sid in belief.probs:
                belief = belief_update(belief, sid)
            newly = [s.id for s in pool.claimable() if s.id not in before]
            belief = _belief_add(belief, newly)

    def drive_fsm(rec: _AgentRec, tour: Tour, sub: SubTask) -> None:
        rec.state = fsm_step(rec.state, Event.TASK_ASSIGNED, sub_task=sub)
        for _ in tour.visits:
            rec.state = fsm_step(rec.state, Event.ARRIVED_AT_COUNTER)
            rec.state = fsm_step(rec.state, Event.DWELL_DONE)

    reactive_params = replace(
        params, max_iterations=min(params.max_iterations,
                                   params.replan_iterations))

    def robot_dodge(pause_t: float, pause_q: Point2) -> bool:
        """Move a parked robot out of the human's way."""
        nonlocal replan_count
        rrec = recs[Agent.ROBOT]
        dodge_rng = random.Random(rrec.base_seed ^ 0x5F5F + int(pause_t * 1000))
        for _ in range(params.max_replans):
            replan_count += 1
            for _try in range(30):
                ang = dodge_rng.random() * 2 * math.pi
                dist = 1.0 + 2.0 * dodge_rng.random()
                target = Point2(pause_q[0] + dist * math.cos(ang),
                                pause_q[1] + dist * math.sin(ang))
                if not (layout.room.contains(target)
                        and clearance_checker(layout, params.agent_radius)(
                            target[0], target[1])):
                    continue
                try:
                    path = plan_single(layout, TimedNode(pause_q, pause_t),
                                       target, [recs[Agent.HUMAN].timeline],
                                       dodge_rng, reactive_params, Agent.ROBOT)
                except PlanningFailure:
                    continue
                # parked tails on: the robot stays at the dodge target, so it
                # must clear everything the human has committed to
                if check_dynamic_collision(path, recs[Agent.HUMAN].timeline,
                                           plan_radius, tol) is not None:
                    continue
                seg = SegmentRecord("idle-dodge", Agent.ROBOT, path, [],
                                    -1, path.nodes[0], SegmentKind.RETREAT)
                retreats.append(seg)
                extend_timeline(Agent.ROBOT, path)
                rrec.state = replace(rrec.state, pose=path.nodes[-1].q,
                                     clock=max(rrec.state.clock, path.end_time))
                return True
        return False

    def replan_robot(pause_t: float) -> bool:
        """Re-plan the robot's in-flight tour (or dodge) from the pause state."""
        nonlocal replan_count
        rrec = recs[Agent.ROBOT]
        seg = rrec.current
        if seg is None or pause_t >= seg.path.end_time - 1e-9:
            pause_q = rrec.timeline.nodes[-1].q
            return robot_dodge(max(pause_t, rrec.state.clock), pause_q)

        nodes = seg.path.nodes
        cut = 0
        while cut + 1 < len(nodes) and nodes[cut + 1].t <= pause_t:
            cut += 1
        pause_node = nodes[cut]
        remaining: list[tuple[CounterKind, float]] = []
        for mark in seg.visits:
            if mark.departure <= pause_node.t + 1e-9:
                continue
            if mark.arrival <= pause_node.t:
                remaining.append((mark.kind, mark.departure - pause_node.t))
            else:
                remaining.append((mark.kind, mark.departure - mark.arrival))
        human_tl = recs[Agent.HUMAN].timeline
        human_pose = human_tl.position_at(pause_node.t)
        for attempt in range(params.max_replans):
            replan_count += 1
            vrng = random.Random(virtual_seed + replan_count * _SEED_STRIDE)
            vpath = virtual_human_path(layout, pool, belief, human_pose,
                                       pause_node.t, vrng, reactive_params)
            seed = rrec.base_seed + rrec.seg_index * _SEED_STRIDE + attempt + 1
            try:
                tour = plan_tour(layout, Agent.ROBOT, rrec.sub_task,
                                 pause_node, [human_tl, vpath],
                                 random.Random(seed), reactive_params,
                                 visits=remaining)
            except TourFailure:
                continue
            if check_dynamic_collision(tour.path, human_tl, plan_radius, tol,
                                       parked_tails=False) is not None:
                continue
            new_nodes = nodes[:cut + 1] + tour.path.nodes[1:]
            seg.path = TimedPath(new_nodes, Agent.ROBOT)
            done = [m for m in seg.visits if m.departure <= pause_node.t + 1e-9]
            seg.visits = done + tour.visits
            _rebuild_robot_timeline(recs, params, segments, retreats)
            rrec.state = replace(rrec.state, pose=seg.path.nodes[-1].q,
                                 clock=seg.path.end_time)
            rrec.pending = (seg.path.end_time, seg.sub_task_id)
            return True
        return False

    def plan_retreat(agent: Agent, from_t: float, pose: Point2) -> bool:
        """Commit an agent's trip back to spawn starting at (pose, from_t).

        May run ahead of the agent's clock: once its last claimed sub-task
        is committed the trip home is the agent's known future, and putting
        it on the timeline lets the other agent route around it.
        """
        rec = recs[agent]
        spawn = params.spawn_human if agent == Agent.HUMAN else params.spawn_robot
        # an idle agent has no task priority to defend, so even the human
        # retreat is planned around the other agent's committed timeline
        other = Agent.ROBOT if agent == Agent.HUMAN else Agent.HUMAN
        otl = recs[other].timeline
        seed = rec.base_seed + rec.seg_index * _SEED_STRIDE
        rec.seg_index += 1
        prng = random.Random(seed)
        clear = clearance_checker(layout, params.agent_radius)
        # prefer parking at spawn, but spawn may sit on the other agent's
        # committed route; fall back to spots in a ring around it
        targets = [spawn]
        for _ in range(20):
            ang = prng.random() * 2.0 * math.pi
            dist = 0.8 + 1.7 * prng.random()
            targets.append(Point2(spawn[0] + dist * math.cos(ang),
                                  spawn[1] + dist * math.sin(ang)))
        for target in targets:
            if not (layout.room.contains(target)
                    and clear(target[0], target[1])):
                continue
            if math.hypot(pose[0] - target[0], pose[1] - target[1]) < 1e-9:
                path = TimedPath([TimedNode(pose, from_t)], agent)
            else:
                try:
                    path = plan_single(layout, TimedNode(pose, from_t), target,
                                       [otl], random.Random(prng.getrandbits(62)),
                                       params, agent)
                except PlanningFailure:
                    continue
            # the agent stays at the target from here on; that stay must
            # clear everything the other agent has already committed to
            stay = TimedPath(
                path.nodes + [TimedNode(path.nodes[-1].q, _PARK_FOREVER)], agent)
            if _collision_pair(stay, otl, plan_radius, tol,
                               parked_tails=True) is not None:
                continue
            if len(path.nodes) > 1:
                seg = SegmentRecord("idle-retreat", agent, path, [], seed,
                                    path.nodes[0], SegmentKind.RETREAT)
                retreats.append(seg)
                extend_timeline(agent, path)
            rec.retreated = True
            park(agent, _PARK_FOREVER)
            return True
        return False  # stay put; the other agent plans around us

    def retreat(agent: Agent, from_t: float) -> None:
        """Idle an agent: commit its retreat if needed and sync its state."""
        rec = recs[agent]
        fresh = not rec.retreated
        if fresh:
            plan_retreat(agent, from_t, rec.state.pose)
        last = next(n for n in reversed(rec.timeline.nodes)
                    if n.t < _PARK_FOREVER / 2.0)
        rec.state = replace(rec.state, pose=last.q,
                            clock=max(rec.state.clock, last.t))
        if fresh and agent == Agent.HUMAN:
            if not _cross_check_robot(from_t):
                # flagged by caller through _pending_failure
                raise _RetreatCollision()

    class _RetreatCollision(Exception):
        pass

    def _cross_check_robot(clock: float) -> bool:
        """Check the human's committed timeline against the robot; re-plan.

        While the robot still has work ahead, times beyond its committed
        timeline are not collisions — its next plan will avoid the freshly
        extended human timeline anyway. Once nothing is left to claim, the
        robot's parked tail is its real position and counts.
        """
        hrec = recs[Agent.HUMAN]
        parked = not pool.unclaimed()
        if parked and not hrec.retreated:
            # the human's last claimed sub-task is now committed, so its
            # trip home is known; put it on the timeline ahead of time for
            # robot re-plans to route around
            last = hrec.timeline.nodes[-1]
            plan_retreat(Agent.HUMAN, last.t, last.q)
        rrec = recs[Agent.ROBOT]
        hit = _collision_pair(hrec.timeline, rrec.timeline,
                              plan_radius, tol, parked_tails=parked)
        guard = 0
        while hit is not None and guard < params.max_replans:
            guard += 1
            if hit[1] > rrec.state.clock + tol:
                # the human reaches the robot's parked position after the
                # robot's last committed motion: step aside rather than
                # re-plan a tour that is already over
                ok = robot_dodge(rrec.state.clock, rrec.timeline.nodes[-1].q)
            else:
                ok = replan_robot(max(clock, hit[0] - 3.0 * tol))
            if not ok:
                return False
            hit = _collision_pair(hrec.timeline, rrec.timeline,
                                  plan_radius, tol, parked_tails=parked)
        return hit is None

    while True:
        active = [a for a in (Agent.HUMAN, Agent.ROBOT)
                  if recs[a].state.mode == Mode.NEED_NEW_TASK]
        if not active:
            process_completions(math.inf)
            if pool.all_completed() or not pool.all:
                return SimOutcome(True, segments,
                                  _finish_times(pool, completion_times),
                                  None, replan_count, retreats)
            return fail("deadlock: agents idle with sub-tasks unfinished")

        agent = min(active, key=lambda a: (recs[a].state.clock,
                                           0 if a == Agent.HUMAN else 1))
        rec = recs[agent]
        clock = rec.state.clock
        process_completions(clock)

        sub = next_sub_task(pool, agent, task_rng)
        if sub is None:
            if pool.unclaimed():
                pending = [r.pending[0] for r in recs.values()
                           if r.pending is not None and r.pending[0] > clock]
                if pending:
                    wait_until = min(pending)
                    park(agent, wait_until)  # visible to the other planner
                    rec.state = replace(rec.state, clock=wait_until)
                    continue
                return fail("deadlock: blocked sub-tasks with no completions pending")
            rec.state = fsm_step(rec.state, Event.NO_TASK_AVAILABLE)
            try:
                retreat(agent, clock)
            except _RetreatCollision:
                return fail("collision: robot could not avoid the idle human")
            park(agent, _PARK_FOREVER)
            continue

        seed = rec.base_seed + rec.seg_index * _SEED_STRIDE
        start = TimedNode(rec.state.pose, clock)
        if agent == Agent.HUMAN:
            obstacles: list[TimedPath] = []
        else:
            obstacles = [recs[Agent.HUMAN].timeline]
            if policy == Policy.ALWAYS_INFERENCE:
                vrng = random.Random(virtual_seed + rec.seg_index * _SEED_STRIDE)
                obstacles = obstacles + [virtual_human_path(
                    layout, pool, belief,
                    recs[Agent.HUMAN].timeline.position_at(clock),
                    clock, vrng, params)]
        try:
            tour = plan_tour(layout, agent, sub, start, obstacles,
                             random.Random(seed), params)
        except TourFailure as exc:
            return fail(f"planning: {exc}")

        seg = SegmentRecord(sub.id, agent, tour.path, tour.visits, seed, start)
        segments.append(seg)
        drive_fsm(rec, tour, sub)
        rec.sub_task = sub
        rec.current = seg
        rec.seg_index += 1
        extend_timeline(agent, tour.path)
        rec.state = replace(rec.state, pose=tour.path.nodes[-1].q,
                            clock=tour.path.end_time)
        rec.pending = (tour.path.end_time, sub.id)

        if agent == Agent.HUMAN:
            if not _cross_check_robot(clock):
                return fail("collision: robot could not avoid the human")

    # unreachable


def _rebuild_robot_timeline(recs, params, segments, retreats) -> None:
    rec = recs[Agent.ROBOT]
    rec.timeline = SimOutcome(
        True, segments, {}, None, 0, retreats).timeline_for(
            Agent.ROBOT, params.spawn_robot)


def _finish_times(pool: TaskPool, completion_times: dict[str, float]) -> dict[str, float]:
    """Dish finish time = latest submission-counter place among its sub-tasks."""
    finish: dict[str, float] = {}
    for sub in pool.all:
        t = completion_times.get(sub.id)
        if t is None:
            continue
        if sub.dish not in finish or t > finish[sub.dish]:
            finish[sub.dish] = t
    for sub in pool.all:
        if sub.id not in completion_times and sub.dish in finish:
            del finish[sub.dish]
    return finish
