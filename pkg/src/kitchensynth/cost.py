"""Layout and path cost terms, aggregation and Pareto dominance.

Layout terms (wall distance, rotation) are unbounded sums of squares; path
terms (length, time, narrowness) are normalized to [0, 1] and forced to 1
when planning failed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import (
    Layout,
    Point2,
    Quarter,
    clearance_left_right,
    clearance_left_right_batch,
    nearest_wall,
)
from .planner import SimOutcome, TimedPath
from .recipe import Agent


@dataclass(frozen=True)
class Weights:
    alpha: float = 1.0
    layout_distance: float = 1.0
    layout_rotation: float = 1.0
    path_length: float = 1.0
    path_time: float = 1.0
    path_narrowness: float = 2.0

    def __post_init__(self):
        for name in ("alpha", "layout_distance", "layout_rotation",
                     "path_length", "path_time", "path_narrowness"):
            if getattr(self, name) < 0:
                raise ValueError(f"weight {name} must be >= 0")


@dataclass(frozen=True)
class CostVector:
    layout_distance: float
    layout_rotation: float
    path_length: float
    path_time: float
    path_narrowness: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.layout_distance, self.layout_rotation,
                self.path_length, self.path_time, self.path_narrowness)


def _quarter_delta(a: Quarter, b: Quarter) -> float:
    """Minimal angular difference between two quarter turns, in radians."""
    d = abs(a.value - b.value) % 360
    if d > 180:
        d = 360 - d
    return math.radians(d)


def layout_distance_cost(layout: Layout) -> float:
    """Sum of squared deviations from each counter's target wall distance.

    Distance is measured from the counter's back-face midpoint, so a flush
    against-the-wall placement scores zero at target distance zero.
    """
    total = 0.0
    for c in layout.counters:
        w, _ = nearest_wall(layout, c.back_face_center)
        d = math.hypot(c.back_face_center.x - w.x, c.back_face_center.y - w.y)
        total += (d - c.target_wall_distance) ** 2
    return total


def layout_rotation_cost(layout: Layout) -> float:
    """Sum of squared quarter-turn misalignments with each nearest wall."""
    total = 0.0
    for c in layout.counters:
        _, wall_quarter = nearest_wall(layout, c.back_face_center)
        total += _quarter_delta(c.orientation, wall_quarter) ** 2
    return total


def length_normalizer(layout: Layout, norm_factor: float = 1.0) -> float:
    return layout.room.perimeter * norm_factor


def path_length_cost(paths: list[TimedPath], layout: Layout,
                     norm_factor: float = 1.0,
                     failed: bool = False) -> float:
    """Total node-to-node length over all paths, boundary-normalized, in [0,1]."""
    if failed:
        return 1.0
    norm = length_normalizer(layout, norm_factor)
    total = sum(p.length() for p in paths)
    return min(1.0, total / norm)


def path_time_cost(outcome: SimOutcome, layout: Layout, speed: float = 1.0,
                   norm_factor: float = 1.0) -> float:
    """Latest dish finish time, normalized by boundary/speed, in [0,1].

    Only the submission-counter timestamps count; nothing after a dish's
    final place contributes.
    """
    if not outcome.success:
        return 1.0
    if not outcome.finish_times:
        return 0.0
    norm = length_normalizer(layout, norm_factor) / speed
    return min(1.0, max(outcome.finish_times.values()) / norm)


def path_width_min(layout: Layout, path: TimedPath,
                   cap: Optional[float] = None) -> float:
    """Tightest passage width along a path.

    Width at a node is twice the smaller of the left/right clearances with
    the heading toward the next distinct node; nodes with no onward motion
    are skipped.
    """
    nodes = path.nodes
    # heading at node i points to the first later node at a distinct position;
    # one backward pass finds it since a run of equal positions shares its
    # next-distinct position with the run's last member
    quads: list[tuple[float, float, float, float]] = []
    nd: Optional[Point2] = None  # next distinct position
    prev: Optional[Point2] = None
    for node in reversed(nodes):
        q = node.q
        if prev is not None:
            dx, dy = prev[0] - q[0], prev[1] - q[1]
            if dx * dx + dy * dy > 1e-18:
                nd = prev
        if nd is not None:
            quads.append((q[0], q[1], nd[0] - q[0], nd[1] - q[1]))
        prev = q
    if not quads:
        return math.inf
    px, py, hx, hy = (np.array(v) for v in zip(*quads))
    left, right = clearance_left_right_batch(layout, px, py, hx, hy, cap=cap)
    widths = 2.0 * np.minimum(left, right)
    return float(widths.min())


def path_narrowness_cost(layout: Layout, paths: list[TimedPath],
                         d_safe: float = 1.2, failed: bool = False) -> float:
    """Mean shortfall below the safe width over the constrained paths only.

    Per path: max(0, (d_safe - width_min) / d_safe). Paths whose narrowness
    cost is zero are ignored in the average; all-zero gives zero.
    """
    if failed:
        return 1.0
    positives = []
    for p in paths:
        w = path_width_min(layout, p)
        c = max(0.0, (d_safe - w) / d_safe)
        if c > 0.0:
            positives.append(c)
    if not positives:
        return 0.0
    return sum(positives) / len(positives)


def total_cost(costs: CostVector, weights: Weights) -> float:
    """Weighted sum of layout and path cost vectors; smaller is better."""
    layout_part = (weights.layout_distance * costs.layout_distance
                   + weights.layout_rotation * costs.layout_rotation)
    path_part = (weights.path_length * costs.path_length
                 + weights.path_time * costs.path_time
                 + weights.path_narrowness * costs.path_narrowness)
    return weights.alpha * layout_part + path_part


def path_cost_part(costs: CostVector, weights: Weights) -> float:
    """Weighted path-term subtotal, used for Pareto-set eviction."""
    return (weights.path_length * costs.path_length
            + weights.path_time * costs.path_time
            + weights.path_narrowness * costs.path_narrowness)


@dataclass
class Solution:
    layout: Layout
    outcome: Optional[SimOutcome]
    costs: CostVector
    total: float
    per_agent_length: dict[Agent, float] = field(default_factory=dict)


def evaluate(layout: Layout, outcome: Optional[SimOutcome], weights: Weights,
             speed: float = 1.0, d_safe: float = 1.2,
             norm_factor: float = 1.0) -> Solution:
    """Assemble the five-term cost vector and total for a simulated design."""
    c_ld = layout_distance_cost(layout)
    c_lr = layout_rotation_cost(layout)
    if outcome is None or not outcome.success:
        c_pl = c_pt = c_pn = 1.0
        per_agent = {}
    else:
        paths = [s.path for s in outcome.segments]
        c_pl = path_length_cost(paths, layout, norm_factor)
        c_pt = path_time_cost(outcome, layout, speed, norm_factor)
        c_pn = path_narrowness_cost(layout, paths, d_safe)
        per_agent = {
            agent: path_length_cost(outcome.paths_for(agent), layout, norm_factor)
            for agent in (Agent.HUMAN, Agent.ROBOT)
        }
    costs = CostVector(c_ld, c_lr, c_pl, c_pt, c_pn)
    return Solution(layout, outcome, costs, total_cost(costs, weights), per_agent)


def dominates(a: Solution, b: Solution) -> bool:
    """True iff a is no worse in every cost term and better in at least one."""
    av, bv = a.costs.as_tuple(), b.costs.as_tuple()
    return all(x <= y for x, y in zip(av, bv)) and any(x < y for x, y in zip(av, bv))
