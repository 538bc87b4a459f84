"""Random waypoint mobility.

Each node travels in a straight line toward its current waypoint at a
speed drawn uniformly from the configured range, pauses at the waypoint
for the configured pause time, then draws a fresh uniform waypoint and
speed. A node whose speed range is zero never leaves its start position,
which is how static scenario layouts are expressed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .geometry import Pos

# Below this leftover dt the advance loop stops; avoids float spin at
# waypoint boundaries.
_EPS = 1e-12


@dataclass
class MobilityState:
    pos: Pos
    waypoint: Pos
    speed: float
    pause_remaining: float
    area: tuple[float, float]
    pause_time: float
    speed_range: tuple[float, float]

    @classmethod
    def initial(
        cls,
        rng: random.Random,
        area: tuple[float, float],
        speed_range: tuple[float, float],
        pause_time: float,
        pos: Pos | None = None,
    ) -> "MobilityState":
        if pos is None:
            pos = (rng.uniform(0.0, area[0]), rng.uniform(0.0, area[1]))
        state = cls(
            pos=pos,
            waypoint=pos,
            speed=0.0,
            pause_remaining=0.0,
            area=area,
            pause_time=pause_time,
            speed_range=speed_range,
        )
        _draw_leg(state, rng)
        return state


def _draw_leg(state: MobilityState, rng: random.Random) -> None:
    state.waypoint = (
        rng.uniform(0.0, state.area[0]),
        rng.uniform(0.0, state.area[1]),
    )
    state.speed = rng.uniform(*state.speed_range)


def advance_waypoint(state: MobilityState, rng: random.Random, dt: float) -> MobilityState:
    """Advance the node by dt seconds, consuming pauses and waypoint
    arrivals within the step. Mutates and returns ``state``."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if state.speed <= 0.0 and state.pause_remaining <= 0.0:
        return state  # static node
    remaining = dt
    while remaining > _EPS:
        if state.pause_remaining > 0.0:
            step = min(state.pause_remaining, remaining)
            state.pause_remaining -= step
            remaining -= step
            if state.pause_remaining <= 0.0:
                state.pause_remaining = 0.0
                _draw_leg(state, rng)
            continue
        px, py = state.pos
        wx, wy = state.waypoint
        leg = math.hypot(wx - px, wy - py)
        if leg <= _EPS:
            # Already at the waypoint: pause, or redraw immediately.
            if state.pause_time > 0.0:
                state.pause_remaining = state.pause_time
            else:
                _draw_leg(state, rng)
            continue
        travel = state.speed * remaining
        if travel >= leg:
            state.pos = state.waypoint
            remaining -= leg / state.speed
            if state.pause_time > 0.0:
                state.pause_remaining = state.pause_time
            else:
                _draw_leg(state, rng)
        else:
            f = travel / leg
            state.pos = (px + (wx - px) * f, py + (wy - py) * f)
            remaining = 0.0
    return state
