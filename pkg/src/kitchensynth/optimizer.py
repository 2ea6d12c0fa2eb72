"""Alternating simulated annealing over layouts and task/path assignments.

Layout stages mutate counter placement; path stages re-run the two-agent
simulation for a fresh task order and fresh trees. Accepted states feed a
fixed-capacity non-dominated Pareto archive.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .geometry import (
    Counter,
    Layout,
    Point2,
    Quarter,
    point_clear,
    validate_layout,
)
from .cost import (
    CostVector,
    Solution,
    Weights,
    dominates,
    evaluate,
    layout_distance_cost,
    layout_rotation_cost,
    path_cost_part,
    total_cost,
)
from .planner import (
    InvalidLayoutError,
    PlannerParams,
    Policy,
    SimOutcome,
    simulate,
)
from .recipe import Recipe, SubTask, TaskPool


class OptimizeMode(Enum):
    TOGETHER = "together"
    SEPARATE = "separate"


@dataclass(frozen=True)
class AnnealConfig:
    t0: float = 1.0
    cooling: float = 0.995
    iterations: int = 2000
    stage_length: int = 10
    mode: OptimizeMode = OptimizeMode.TOGETHER
    layout_threshold: float = 0.05
    rng_seed: int = 0
    perturb_scale: float = 2.0  # Gaussian position step is perturb_scale * t
    resim_on_layout_move: bool = False

    def __post_init__(self):
        if not (0 < self.cooling < 1):
            raise ValueError("cooling must be in (0, 1)")
        if self.t0 <= 0:
            raise ValueError("t0 must be > 0")
        if self.stage_length < 1:
            raise ValueError("stage_length must be >= 1")


def objective(total: float, t: float) -> float:
    """Boltzmann-style objective exp(-C/t); larger is better."""
    if t <= 0:
        raise ValueError("temperature must be > 0")
    return math.exp(-total / t)


def accept(f_old: float, f_new: float, rng: random.Random) -> bool:
    """Metropolis criterion: accept with probability min(1, f_new/f_old)."""
    if f_old <= 0:
        raise ValueError("f_old must be > 0")
    if f_new >= f_old:
        return True
    return rng.random() < f_new / f_old


def _accept_delta(old_total: float, new_total: float, t: float,
                  rng: random.Random) -> bool:
    """accept() on Boltzmann objectives, evaluated in log space.

    min(1, exp(-new/t) / exp(-old/t)) = min(1, exp(-(new-old)/t)); the delta
    form avoids the underflow of exp(-C/t) once the temperature is tiny.
    """
    if new_total <= old_total:
        return True
    arg = -(new_total - old_total) / t
    return arg > -745.0 and rng.random() < math.exp(arg)


def propose_layout_move(layout: Layout, rng: random.Random, t: float,
                        perturb_scale: float = 2.0,
                        max_resamples: int = 20) -> Layout:
    """Perturb one counter (position + orientation) or swap two counters.

    The Gaussian position step scales with temperature so early moves are
    large and late moves are fine adjustments. Invalid proposals are
    resampled; after max_resamples the original layout is returned.
    """
    counters = layout.counters
    if not counters:
        return layout
    for _ in range(max_resamples):
        do_swap = len(counters) >= 2 and rng.random() < 0.5
        new = list(counters)
        if do_swap:
            i, j = rng.sample(range(len(counters)), 2)
            ci, cj = counters[i], counters[j]
            new[i] = replace(ci, position=cj.position, orientation=cj.orientation)
            new[j] = replace(cj, position=ci.position, orientation=ci.orientation)
        else:
            i = rng.randrange(len(counters))
            c = counters[i]
            sigma = perturb_scale * t
            pos = Point2(c.position.x + rng.gauss(0.0, sigma),
                         c.position.y + rng.gauss(0.0, sigma))
            new[i] = replace(c, position=pos,
                             orientation=rng.choice(list(Quarter)))
        candidate = layout.with_counters(new)
        if not validate_layout(candidate):
            return candidate
    return layout


def propose_path_move(layout: Layout, sub_tasks: list[SubTask],
                      rng: random.Random, params: PlannerParams,
                      policy: Policy = Policy.DIRECT_THEN_REACTIVE) -> SimOutcome:
    """Fresh simulation: new random task claims and new RRT trees."""
    pool = TaskPool(list(sub_tasks))
    return simulate(layout, pool, rng, params, policy)


@dataclass
class ParetoSet:
    capacity: int = 5
    members: list[Solution] = field(default_factory=list)
    weights: Weights = Weights()


def pareto_insert(pareto: ParetoSet, s: Solution) -> ParetoSet:
    """Insert under non-dominance; evict the largest path cost when full."""
    if any(dominates(m, s) for m in pareto.members):
        return pareto
    kept = [m for m in pareto.members if not dominates(s, m)]
    kept.append(s)
    if len(kept) > pareto.capacity:
        worst = max(kept, key=lambda m: path_cost_part(m.costs, pareto.weights))
        kept.remove(worst)
    return ParetoSet(pareto.capacity, kept, pareto.weights)


@dataclass
class Problem:
    """Everything an anneal run needs besides its schedule."""

    initial_layout: Layout
    recipes: list[Recipe]
    sub_tasks: list[SubTask]
    weights: Weights = Weights()
    params: PlannerParams = PlannerParams()
    d_safe: float = 1.2
    norm_factor: float = 1.0
    policy: Policy = Policy.DIRECT_THEN_REACTIVE

    def evaluate(self, layout: Layout, outcome: Optional[SimOutcome]) -> Solution:
        return evaluate(layout, outcome, self.weights, self.params.speed,
                        self.d_safe, self.norm_factor)


@dataclass
class AnnealResult:
    pareto: ParetoSet
    initial: Optional[Solution]
    best: Optional[Solution]
    evaluations: int = 0
    accepted: int = 0
    diagnostic: Optional[str] = None


def _stored_paths_valid(layout: Layout, outcome: Optional[SimOutcome],
                        radius: float) -> bool:
    """A stored outcome survives a layout move iff its nodes stay clear."""
    if outcome is None or not outcome.success:
        return True
    for seg in outcome.segments:
        for node in seg.path.nodes:
            if not point_clear(layout, node.q, radius):
                return False
    return True


def _try_simulate(layout: Layout, problem: Problem,
                  rng: random.Random) -> Optional[SimOutcome]:
    try:
        return propose_path_move(layout, problem.sub_tasks, rng,
                                 problem.params, problem.policy)
    except InvalidLayoutError:
        return None


def anneal(config: AnnealConfig, problem: Problem) -> AnnealResult:
    """Run alternating (or separate-stage) annealing and collect a Pareto set."""
    rng = random.Random(config.rng_seed)
    pareto = ParetoSet(weights=problem.weights)
    radius = problem.params.agent_radius

    layout = problem.initial_layout
    if validate_layout(layout):
        return AnnealResult(pareto, None, None,
                            diagnostic="initial layout is invalid")

    t = config.t0
    budget = config.iterations
    best: Optional[Solution] = None
    accepted_count = 0
    evaluations = 0

    if config.mode == OptimizeMode.SEPARATE:
        # stage 1: layout terms only, no simulation
        layout_cost = (layout_distance_cost(layout)
                       + layout_rotation_cost(layout))
        spent = 0
        while layout_cost >= config.layout_threshold and spent < budget // 2:
            cand = propose_layout_move(layout, rng, t, config.perturb_scale)
            cand_cost = (layout_distance_cost(cand)
                         + layout_rotation_cost(cand))
            w = problem.weights
            f_old = objective(w.alpha * layout_cost, t)
            f_new = objective(w.alpha * cand_cost, t)
            if accept(f_old, f_new, rng):
                layout, layout_cost = cand, cand_cost
            t *= config.cooling
            spent += 1
        remaining = budget - spent
        outcome = _try_simulate(layout, problem, rng)
        current = problem.evaluate(layout, outcome)
        initial = current
        evaluations += 1
        best = current
        if outcome is not None and outcome.success:
            pareto = pareto_insert(pareto, current)
        for _ in range(remaining):
            outcome = _try_simulate(layout, problem, rng)
            evaluations += 1
            cand = problem.evaluate(layout, outcome)
            if _accept_delta(current.total, cand.total, t, rng):
                current = cand
                accepted_count += 1
                if cand.outcome is not None and cand.outcome.success:
                    pareto = pareto_insert(pareto, cand)
                if best is None or cand.total < best.total:
                    best = cand
            t *= config.cooling
        if not pareto.members:
            return AnnealResult(pareto, initial, best, evaluations,
                                accepted_count,
                                "no successful simulation in entire run")
        return AnnealResult(pareto, initial, best, evaluations, accepted_count)

    # Together mode
    outcome = _try_simulate(layout, problem, rng)
    current = problem.evaluate(layout, outcome)
    initial = current
    evaluations += 1
    best = current
    if outcome is not None and outcome.success:
        pareto = pareto_insert(pareto, current)

    step = 0
    while step < budget:
        stage_is_layout = (step // config.stage_length) % 2 == 0
        if stage_is_layout:
            cand_layout = propose_layout_move(layout, rng, t,
                                              config.perturb_scale)
            cand_outcome = current.outcome
            if (config.resim_on_layout_move
                    or not _stored_paths_valid(cand_layout, cand_outcome, radius)):
                cand_outcome = _try_simulate(cand_layout, problem, rng)
                evaluations += 1
            cand = problem.evaluate(cand_layout, cand_outcome)
        else:
            cand_layout = layout
            cand_outcome = _try_simulate(layout, problem, rng)
            evaluations += 1
            cand = problem.evaluate(cand_layout, cand_outcome)

        if _accept_delta(current.total, cand.total, t, rng):
            layout, current = cand_layout, cand
            accepted_count += 1
            if cand.outcome is not None and cand.outcome.success:
                pareto = pareto_insert(pareto, cand)
            if best is None or cand.total < best.total:
                best = cand
        t *= config.cooling
        step += 1

    if not pareto.members:
        return AnnealResult(pareto, initial, best, evaluations, accepted_count,
                            "no successful simulation in entire run")
    return AnnealResult(pareto, initial, best, evaluations, accepted_count)


def initial_layout(room_layout: Layout, rng: random.Random,
                   max_attempts: int = 500) -> Layout:
    """Place the counter inventory at random clear positions along the walls."""
    placed: list[Counter] = []
    base = Layout(room_layout.room, [])
    for c in room_layout.counters:
        ok = False
        for _ in range(max_attempts):
            edges = base.room.edges
            a, b = edges[rng.randrange(len(edges))]
            u = rng.random()
            wx, wy = a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)
            dx, dy = b.x - a.x, b.y - a.y
            L = math.hypot(dx, dy)
            if L == 0:
                continue
            nx, ny = -dy / L, dx / L  # interior normal of a CCW edge
            orient = _snap(nx, ny)
            off = c.depth / 2.0 + c.target_wall_distance
            cand = replace(c, position=Point2(wx + nx * off, wy + ny * off),
                           orientation=orient)
            trial = Layout(base.room, placed + [cand])
            if not validate_layout(trial):
                placed.append(cand)
                ok = True
                break
        if not ok:
            raise RuntimeError(f"could not place counter {c.id} along a wall")
    return Layout(base.room, placed)


def _snap(nx: float, ny: float) -> Quarter:
    if abs(nx) >= abs(ny):
        return Quarter.DEG_0 if nx >= 0 else Quarter.DEG_180
    return Quarter.DEG_90 if ny >= 0 else Quarter.DEG_270
