"""Experiment orchestration, independent verification and report output."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from .config import ProblemConfig, problem_from_config
from .cost import Solution, evaluate
from .geometry import point_clear, validate_layout
from .optimizer import (
    AnnealConfig,
    AnnealResult,
    ParetoSet,
    anneal,
    pareto_insert,
)
from .planner import check_dynamic_collision
from .recipe import Agent
from .render import render_solution


class VerificationError(AssertionError):
    """A solution failed the independent verification pipeline."""


def verify_solution(solution: Solution, cfg: ProblemConfig) -> None:
    """Re-check a solution from scratch: geometry, separation and costs."""
    violations = validate_layout(solution.layout)
    if violations:
        raise VerificationError(f"layout violations: {violations}")
    outcome = solution.outcome
    if outcome is None or not outcome.success:
        raise VerificationError("solution has no successful simulation")
    r = cfg.params.agent_radius
    for seg in outcome.segments + outcome.retreats:
        for node in seg.path.nodes:
            if not point_clear(solution.layout, node.q, r):
                raise VerificationError(
                    f"segment {seg.sub_task_id}: node {node.q} not clear")
    # full timelines including retreats: an agent that finishes early moves
    # home, so checking only task segments would park it at a stale pose
    human = outcome.timeline_for(Agent.HUMAN, cfg.params.spawn_human)
    robot = outcome.timeline_for(Agent.ROBOT, cfg.params.spawn_robot)
    hit = check_dynamic_collision(human, robot, r, cfg.params.time_tol)
    if hit is not None:
        raise VerificationError(f"agents closer than 2r at t={hit:.2f}")
    recomputed = evaluate(solution.layout, outcome, cfg.weights,
                          cfg.params.speed, cfg.d_safe, cfg.norm_factor)
    if recomputed.costs != solution.costs or recomputed.total != solution.total:
        raise VerificationError(
            f"cost mismatch: stored {solution.costs} != {recomputed.costs}")


# ---------------------------------------------------------------------------
# serialization

def _round(x: float) -> float:
    return round(x, 9)


def solution_to_dict(solution: Solution) -> dict[str, Any]:
    out: dict[str, Any] = {
        "costs": {
            "layout_distance": _round(solution.costs.layout_distance),
            "layout_rotation": _round(solution.costs.layout_rotation),
            "path_length": _round(solution.costs.path_length),
            "path_time": _round(solution.costs.path_time),
            "path_narrowness": _round(solution.costs.path_narrowness),
            "total": _round(solution.total),
        },
        "per_agent_path_length": {
            a.value: _round(v) for a, v in sorted(solution.per_agent_length.items(),
                                                  key=lambda kv: kv[0].value)
        },
        "layout": {
            "counters": [
                {
                    "id": c.id,
                    "kind": c.kind.value,
                    "position": [_round(c.position.x), _round(c.position.y)],
                    "orientation_deg": c.orientation.value,
                    "width": c.width,
                    "depth": c.depth,
                    "target_wall_distance": c.target_wall_distance,
                }
                for c in solution.layout.counters
            ],
        },
    }
    if solution.outcome is not None:
        o = solution.outcome
        out["assignment"] = {
            "human": [s.sub_task_id for s in o.segments if s.agent == Agent.HUMAN],
            "robot": [s.sub_task_id for s in o.segments if s.agent == Agent.ROBOT],
        }
        out["finish_times"] = {k: _round(v) for k, v in sorted(o.finish_times.items())}
        out["replan_count"] = o.replan_count
        out["segments"] = [
            {
                "sub_task": s.sub_task_id,
                "agent": s.agent.value,
                "plan_seed": s.plan_seed,
                "nodes": [[_round(n.q[0]), _round(n.q[1]), _round(n.t)]
                          for n in s.path.nodes],
                "visits": [
                    {"kind": m.kind.value, "counter": m.counter_id,
                     "arrival": _round(m.arrival), "departure": _round(m.departure)}
                    for m in s.visits
                ],
            }
            for s in o.segments
        ]
    return out


@dataclass
class RunReport:
    mode: str
    seeds: list[int]
    iterations: int
    solutions: list[dict[str, Any]] = field(default_factory=list)
    per_run: list[dict[str, Any]] = field(default_factory=list)
    wall_clock: Optional[float] = None  # omitted from output unless requested

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        d: dict[str, Any] = {
            "mode": self.mode,
            "seeds": self.seeds,
            "iterations": self.iterations,
            "solutions": self.solutions,
            "runs": self.per_run,
        }
        if include_timing and self.wall_clock is not None:
            d["wall_clock_s"] = self.wall_clock
        return d

    def dumps(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), sort_keys=True, indent=2)


def run_one(cfg: ProblemConfig, seed: int) -> AnnealResult:
    """One seeded anneal run on a freshly screened initial layout."""
    problem = problem_from_config(cfg, seed)
    schedule = replace(cfg.anneal, rng_seed=seed)
    return anneal(schedule, problem)


@dataclass
class ExperimentResult:
    report: RunReport
    pareto: ParetoSet
    results: list[AnnealResult]


def run_experiment(cfg: ProblemConfig, seeds: list[int],
                   out_dir: Optional[Path] = None, render: bool = True,
                   include_timing: bool = False) -> ExperimentResult:
    """Run seeded anneals, merge Pareto sets, verify and serialize."""
    start = time.monotonic()
    results = [run_one(cfg, seed) for seed in seeds]
    merged = ParetoSet(weights=cfg.weights)
    for res in results:
        for member in res.pareto.members:
            merged = pareto_insert(merged, member)
    verified = []
    for member in merged.members:
        verify_solution(member, cfg)
        verified.append(member)
    verified.sort(key=lambda s: s.total)

    report = RunReport(
        mode=cfg.anneal.mode.value,
        seeds=list(seeds),
        iterations=cfg.anneal.iterations,
        solutions=[solution_to_dict(s) for s in verified],
        per_run=[
            {
                "seed": seed,
                "initial_total": _round(res.initial.total) if res.initial else None,
                "best_total": _round(res.best.total) if res.best else None,
                "evaluations": res.evaluations,
                "accepted": res.accepted,
                "pareto_size": len(res.pareto.members),
                "diagnostic": res.diagnostic,
            }
            for seed, res in zip(seeds, results)
        ],
        wall_clock=time.monotonic() - start,
    )

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(report.dumps(include_timing))
        if render:
            for i, sol in enumerate(verified, start=1):
                svg = render_solution(sol, title=f"solution {i} "
                                      f"(total {sol.total:.3f})")
                (out_dir / f"solution-{i}.svg").write_text(svg)
    return ExperimentResult(report, ParetoSet(merged.capacity, verified,
                                              merged.weights), results)


def load_report(path: Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())
