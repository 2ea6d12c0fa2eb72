"""Shared fixtures: canonical rooms, layouts and screened problems."""

import pytest

from kitchensynth.config import default_config, problem_from_config
from kitchensynth.geometry import (
    Counter,
    CounterKind,
    Layout,
    Point2,
    Quarter,
    Room,
)


def square_room(side: float = 10.0) -> Room:
    return Room((Point2(0, 0), Point2(side, 0),
                 Point2(side, side), Point2(0, side)))


def make_counter(cid: str, x: float, y: float,
                 orientation: Quarter = Quarter.DEG_0,
                 kind: CounterKind = CounterKind.PLAIN,
                 width: float = 1.0, depth: float = 0.6,
                 target_wall_distance: float = 0.0) -> Counter:
    return Counter(cid, kind, Point2(x, y), orientation,
                   width=width, depth=depth,
                   target_wall_distance=target_wall_distance)


@pytest.fixture(scope="session")
def empty_square() -> Layout:
    return Layout(square_room(), [])


@pytest.fixture(scope="session")
def corridor_layout() -> Layout:
    """A 1.0 m wide horizontal corridor between two counters in a 10x10 room.

    Counter tops/bottoms sit at y = 4.5 and y = 5.5, so a point at y = 5.0
    heading along x sees 0.5 m of clearance on each side.
    """
    a = make_counter("low", 5.0, 4.2, Quarter.DEG_90)   # y in [3.9, 4.5]
    b = make_counter("high", 5.0, 5.8, Quarter.DEG_90)  # y in [5.5, 6.1]
    return Layout(square_room(), [a, b])


@pytest.fixture(scope="session")
def regular_config():
    return default_config("regular")


@pytest.fixture(scope="session")
def regular_problem(regular_config):
    return problem_from_config(regular_config, 7)
