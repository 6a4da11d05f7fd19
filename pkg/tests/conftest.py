import math
import random

import pytest

from kinescript import Recipe, SegmentSpec, make_command, make_sample, registry


@pytest.fixture(scope="session")
def reg():
    return registry()


@pytest.fixture
def walk_turn_crawl():
    """The canonical 3-segment demo: walk, slow left turn, ground crawl."""
    return Recipe(name="walk-turn-crawl", seed=42, segments=(
        SegmentSpec(mode="Walk", duration_s=3.0, movement="forward"),
        SegmentSpec(mode="Walk", duration_s=4.0, movement="turn_left", turn_deg=90.0),
        SegmentSpec(mode="Hand Crawl", duration_s=3.0, movement="forward"),
    ))


@pytest.fixture
def ten_second_recipe():
    return Recipe(name="ten", seed=7, segments=(
        SegmentSpec(mode="Walk", duration_s=2.0, movement="forward"),
        SegmentSpec(mode="Run", duration_s=3.0, movement="forward", speed=2.5),
        SegmentSpec(mode="Squat", duration_s=5.0),
    ))


def random_command(rng: random.Random):
    if rng.random() < 0.2:
        movement = (0.0, 0.0)
    else:
        a = rng.uniform(-math.pi, math.pi)
        movement = (math.cos(a), math.sin(a))
    b = rng.uniform(-math.pi, math.pi)
    return make_command(
        timestamp_ms=rng.randrange(0, 10**9),
        mode_index=rng.randrange(0, 25),
        movement_dir=movement,
        facing_dir=(math.cos(b), math.sin(b)),
        speed=rng.uniform(0.0, 10.0),
        pelvis_height=rng.uniform(0.05, 2.0),
    )


def random_sample(rng: random.Random):
    heading = rng.uniform(-math.pi, math.pi)
    if heading == -math.pi:
        heading = math.pi
    return make_sample(
        timestamp_ms=rng.randrange(0, 10**9),
        mode_index=rng.randrange(0, 25),
        base_pos=(rng.uniform(-100, 100), rng.uniform(-100, 100), rng.uniform(0.1, 2.0)),
        heading_rad=heading,
        base_vel=(rng.uniform(-5, 5), rng.uniform(-5, 5)),
        pelvis_height=rng.uniform(0.05, 2.0),
        gait_phase=rng.random() % 1.0,
        joints=tuple(rng.uniform(-3, 3) for _ in range(rng.randrange(0, 4))),
    )
