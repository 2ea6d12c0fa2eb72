"""Problem configuration: JSON schema, defaults and bundled room variants."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .geometry import (
    Counter,
    CounterKind,
    Layout,
    Point2,
    Quarter,
    Room,
    point_clear,
    service_configuration,
    validate_layout,
)
from .cost import Weights
from .optimizer import (
    AnnealConfig,
    OptimizeMode,
    Problem,
    initial_layout,
)
from .planner import PlannerParams, Policy
from .recipe import Component, DwellTimes, Recipe, expand_recipes


class ConfigError(ValueError):
    """A configuration file failed parsing or semantic validation."""


ROOM_VARIANTS = ("regular", "small", "lshape")

_DEFAULT_COUNTERS = [
    ("bun", CounterKind.BUN),
    ("meat", CounterKind.MEAT),
    ("tomato", CounterKind.TOMATO),
    ("lettuce", CounterKind.LETTUCE),
    ("cheese", CounterKind.CHEESE),
    ("stove", CounterKind.STOVE),
    ("cutting-board", CounterKind.CUTTING_BOARD),
    ("plate", CounterKind.PLATE),
    ("plain", CounterKind.PLAIN),
]


@dataclass
class ProblemConfig:
    room: Room
    counters: list[Counter]           # inventory; positions are placeholders
    recipes: list[Recipe]
    dwell: DwellTimes = DwellTimes()
    params: PlannerParams = PlannerParams()
    weights: Weights = Weights()
    d_safe: float = 1.2
    norm_factor: float = 1.0
    anneal: AnnealConfig = AnnealConfig()
    policy: Policy = Policy.DIRECT_THEN_REACTIVE
    raw: dict = field(default_factory=dict)


def _rect_room(width: float, height: float,
               invisible_wall: bool = True,
               blocking: bool = False) -> Room:
    boundary = (Point2(0, 0), Point2(width, 0),
                Point2(width, height), Point2(0, height))
    walls = ()
    if invisible_wall:
        walls = ((Point2(width / 4, height / 2), Point2(3 * width / 4, height / 2)),)
    return Room(boundary, walls, interior_walls_block=blocking)


def _lshape_room(width: float, height: float,
                 cut_w: float, cut_h: float) -> Room:
    # square minus its top-right corner, CCW
    boundary = (Point2(0, 0), Point2(width, 0), Point2(width, height - cut_h),
                Point2(width - cut_w, height - cut_h), Point2(width - cut_w, height),
                Point2(0, height))
    return Room(boundary)


def room_for_variant(variant: str) -> tuple[Room, Point2, Point2]:
    """Bundled rooms with agent spawn poses: regular 8x8, small 6.4x6.4
    (boundary x0.8), and the regular square minus a 4x4 corner."""
    if variant == "regular":
        return _rect_room(8.0, 8.0), Point2(3.4, 4.0), Point2(4.6, 4.0)
    if variant == "small":
        return _rect_room(6.4, 6.4), Point2(2.6, 3.2), Point2(3.8, 3.2)
    if variant == "lshape":
        return _lshape_room(8.0, 8.0, 4.0, 4.0), Point2(2.0, 2.0), Point2(3.2, 2.0)
    raise ConfigError(f"unknown room variant {variant!r}")


def default_counters() -> list[Counter]:
    return [Counter(cid, kind, Point2(0.0, 0.0), Quarter.DEG_90,
                    width=1.0, depth=0.6, target_wall_distance=0.0)
            for cid, kind in _DEFAULT_COUNTERS]


def two_burger_recipes() -> list[Recipe]:
    """The bundled task: one full burger on the Plate, one plain on the Plain."""
    return [
        Recipe("burger-1",
               (Component.BUN, Component.MEAT, Component.CHEESE,
                Component.LETTUCE, Component.TOMATO),
               CounterKind.PLATE),
        Recipe("burger-2", (Component.BUN, Component.MEAT), CounterKind.PLAIN),
    ]


def default_config(variant: str = "regular") -> ProblemConfig:
    room, spawn_h, spawn_r = room_for_variant(variant)
    params = PlannerParams(spawn_human=spawn_h, spawn_robot=spawn_r)
    return ProblemConfig(room=room, counters=default_counters(),
                         recipes=two_burger_recipes(), params=params)


# ---------------------------------------------------------------------------
# JSON loading

def _point(v: Any, where: str) -> Point2:
    if (not isinstance(v, (list, tuple)) or len(v) != 2
            or not all(isinstance(x, (int, float)) for x in v)):
        raise ConfigError(f"{where}: expected [x, y], got {v!r}")
    return Point2(float(v[0]), float(v[1]))


def _room_from_dict(d: dict) -> tuple[Room, Optional[Point2], Optional[Point2]]:
    kind = d.get("type", "rectangle")
    iw = d.get("invisible_wall", {})
    enabled = iw.get("enabled", kind == "rectangle")
    blocking = bool(iw.get("blocking", False))
    if kind == "rectangle":
        w = float(d.get("width", 8.0))
        h = float(d.get("height", 8.0))
        room = _rect_room(w, h, invisible_wall=enabled, blocking=blocking)
    elif kind == "lshape":
        room = _lshape_room(float(d.get("width", 8.0)), float(d.get("height", 8.0)),
                            float(d.get("cutout_width", 4.0)),
                            float(d.get("cutout_height", 4.0)))
    elif kind == "polygon":
        verts = d.get("vertices")
        if not verts or len(verts) < 3:
            raise ConfigError("room.vertices: need at least 3 points")
        room = Room(tuple(_point(v, "room.vertices") for v in verts))
    else:
        raise ConfigError(f"room.type: unknown {kind!r}")
    if "segments" in iw:
        segs = tuple((_point(s[0], "invisible_wall"), _point(s[1], "invisible_wall"))
                     for s in iw["segments"])
        room = Room(room.boundary, segs, interior_walls_block=blocking)
    spawn_h = _point(d["spawn_human"], "room.spawn_human") if "spawn_human" in d else None
    spawn_r = _point(d["spawn_robot"], "room.spawn_robot") if "spawn_robot" in d else None
    return room, spawn_h, spawn_r


def _required_kinds(recipes: list[Recipe]) -> set[CounterKind]:
    needed: set[CounterKind] = set()
    for r in recipes:
        needed.add(CounterKind.BUN)
        needed.add(r.submission_counter)
        if Component.MEAT in r.components:
            needed.update({CounterKind.MEAT, CounterKind.STOVE})
        for comp, kind in ((Component.TOMATO, CounterKind.TOMATO),
                           (Component.LETTUCE, CounterKind.LETTUCE),
                           (Component.CHEESE, CounterKind.CHEESE)):
            if comp in r.components:
                needed.update({kind, CounterKind.CUTTING_BOARD})
    return needed


def config_from_dict(data: dict) -> ProblemConfig:
    if not isinstance(data, dict):
        raise ConfigError("top-level config must be a JSON object")
    try:
        room, spawn_h, spawn_r = _room_from_dict(data.get("room", {}))

        counters = []
        for cd in data.get("counters", None) or [
                {"id": cid, "kind": kind.value} for cid, kind in _DEFAULT_COUNTERS]:
            try:
                kind = CounterKind(cd["kind"])
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"counters: bad entry {cd!r}: {exc}") from exc
            counters.append(Counter(
                str(cd.get("id", kind.value.lower())), kind, Point2(0.0, 0.0),
                Quarter.DEG_90,
                width=float(cd.get("width", 1.0)),
                depth=float(cd.get("depth", 0.6)),
                target_wall_distance=float(cd.get("target_wall_distance", 0.0))))

        dwell_d = data.get("dwell", {})
        dwell = DwellTimes(cook=float(dwell_d.get("cook", 12.0)),
                           chop=float(dwell_d.get("chop", 6.0)),
                           pickup=float(dwell_d.get("pickup", 1.0)),
                           place=float(dwell_d.get("place", 1.0)))

        recipes = []
        for rd in data.get("recipes", None) or [
                {"dish_id": r.dish_id,
                 "components": [c.value for c in r.components],
                 "submission": r.submission_counter.value}
                for r in two_burger_recipes()]:
            comps = tuple(Component(c) for c in rd["components"])
            recipes.append(Recipe(str(rd["dish_id"]), comps,
                                  CounterKind(rd.get("submission", "Plate"))))

        ad = data.get("agent", {})
        radius = float(ad.get("radius", 0.3))
        pd = data.get("planner", {})
        defaults = PlannerParams()
        w, h = room.bbox[2] - room.bbox[0], room.bbox[3] - room.bbox[1]
        params = PlannerParams(
            agent_radius=radius,
            speed=float(ad.get("speed", 1.0)),
            step_length=float(pd.get("step_length", radius)),
            goal_bias=float(pd.get("goal_bias", defaults.goal_bias)),
            max_iterations=int(pd.get("max_iterations", defaults.max_iterations)),
            random_extend_steps=int(pd.get("random_extend_steps",
                                           defaults.random_extend_steps)),
            standoff=float(pd.get("standoff", defaults.standoff)),
            max_replans=int(pd.get("max_replans", defaults.max_replans)),
            spawn_human=spawn_h or _point(ad.get("spawn_human", [w / 2 - 0.6, h / 2]),
                                          "agent.spawn_human"),
            spawn_robot=spawn_r or _point(ad.get("spawn_robot", [w / 2 + 0.6, h / 2]),
                                          "agent.spawn_robot"))

        wd = data.get("weights", {})
        weights = Weights(alpha=float(wd.get("alpha", 1.0)),
                          layout_distance=float(wd.get("layout_distance", 1.0)),
                          layout_rotation=float(wd.get("layout_rotation", 1.0)),
                          path_length=float(wd.get("path_length", 1.0)),
                          path_time=float(wd.get("path_time", 1.0)),
                          path_narrowness=float(wd.get("path_narrowness", 2.0)))

        an = data.get("anneal", {})
        anneal_defaults = AnnealConfig()
        anneal = AnnealConfig(
            t0=float(an.get("t0", anneal_defaults.t0)),
            cooling=float(an.get("cooling", anneal_defaults.cooling)),
            iterations=int(an.get("iterations", anneal_defaults.iterations)),
            stage_length=int(an.get("stage_length", anneal_defaults.stage_length)),
            mode=OptimizeMode(an.get("mode", "together")),
            layout_threshold=float(an.get("layout_threshold",
                                          anneal_defaults.layout_threshold)),
            rng_seed=int(an.get("rng_seed", 0)),
            perturb_scale=float(an.get("perturb_scale",
                                       anneal_defaults.perturb_scale)),
            resim_on_layout_move=bool(an.get("resim_on_layout_move", False)))

        d_safe = float(data.get("d_safe", 4.0 * radius))
        norm_factor = float(data.get("norm_factor", 1.0))
        policy = Policy(data.get("policy", Policy.DIRECT_THEN_REACTIVE.value))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc

    have = {c.kind for c in counters}
    missing = _required_kinds(recipes) - have
    if missing:
        names = ", ".join(sorted(k.value for k in missing))
        raise ConfigError(f"recipes need counter kinds missing from inventory: {names}")

    return ProblemConfig(room=room, counters=counters, recipes=recipes,
                         dwell=dwell, params=params, weights=weights,
                         d_safe=d_safe, norm_factor=norm_factor,
                         anneal=anneal, policy=policy, raw=data)


def load_config(path: str | Path) -> ProblemConfig:
    """Load and validate a JSON problem configuration."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} col {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


# ---------------------------------------------------------------------------
# problem construction

def screened_initial_layout(cfg: ProblemConfig, seed: int,
                            max_attempts: int = 100) -> Layout:
    """Random along-the-wall placement, re-rolled until agents can work.

    Screens for valid placement, clear spawn poses and a reachable service
    configuration at every counter.
    """
    template = Layout(cfg.room, cfg.counters)
    rng = random.Random(seed)
    for _ in range(max_attempts):
        try:
            layout = initial_layout(template, rng)
        except RuntimeError:
            continue
        if validate_layout(layout):
            continue
        r = cfg.params.agent_radius
        if not (point_clear(layout, cfg.params.spawn_human, r)
                and point_clear(layout, cfg.params.spawn_robot, r)):
            continue
        try:
            for c in layout.counters:
                service_configuration(layout, c, r, cfg.params.standoff)
        except Exception:
            continue
        return layout
    raise RuntimeError(f"no workable initial layout found from seed {seed}")


def problem_from_config(cfg: ProblemConfig, seed: int) -> Problem:
    layout = screened_initial_layout(cfg, seed)
    sub_tasks = expand_recipes(cfg.recipes, cfg.dwell)
    return Problem(initial_layout=layout, recipes=cfg.recipes,
                   sub_tasks=sub_tasks, weights=cfg.weights,
                   params=cfg.params, d_safe=cfg.d_safe,
                   norm_factor=cfg.norm_factor, policy=cfg.policy)
