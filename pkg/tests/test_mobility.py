import random

import pytest

from fanetsim import rng as rng_mod
from fanetsim.mobility import MobilityState, advance_waypoint


def make_state(pos, waypoint, speed, pause_remaining=0.0, pause_time=0.0,
               area=(1000.0, 1000.0), speed_range=(2.5, 7.0)):
    return MobilityState(
        pos=pos,
        waypoint=waypoint,
        speed=speed,
        pause_remaining=pause_remaining,
        area=area,
        pause_time=pause_time,
        speed_range=speed_range,
    )


def test_pause_consumes_time_without_motion():
    st = make_state((5.0, 5.0), (5.0, 5.0), speed=3.0, pause_remaining=2.0, pause_time=2.0)
    advance_waypoint(st, random.Random(0), 1.0)
    assert st.pos == (5.0, 5.0)
    assert st.pause_remaining == pytest.approx(1.0)


def test_linear_motion_toward_waypoint():
    st = make_state((0.0, 0.0), (100.0, 0.0), speed=10.0)
    advance_waypoint(st, random.Random(0), 1.0)
    assert st.pos[0] == pytest.approx(10.0)
    assert st.pos[1] == pytest.approx(0.0)


def test_arrival_starts_pause_within_step():
    st = make_state((0.0, 0.0), (5.0, 0.0), speed=10.0, pause_time=4.0)
    advance_waypoint(st, random.Random(0), 1.0)  # arrives after 0.5 s
    assert st.pos == (5.0, 0.0)
    assert st.pause_remaining == pytest.approx(3.5)


def test_arrival_without_pause_draws_new_leg_and_keeps_moving():
    rng = random.Random(7)
    st = make_state((0.0, 0.0), (5.0, 0.0), speed=10.0, pause_time=0.0)
    advance_waypoint(st, rng, 1.0)
    assert st.waypoint != (5.0, 0.0)
    # moved past the old waypoint onto the new leg
    assert st.pos != (5.0, 0.0)


def test_zero_dt_rejected():
    st = make_state((0.0, 0.0), (5.0, 0.0), speed=1.0)
    with pytest.raises(ValueError):
        advance_waypoint(st, random.Random(0), 0.0)


def test_static_node_never_moves():
    st = make_state((3.0, 4.0), (3.0, 4.0), speed=0.0, speed_range=(0.0, 0.0))
    for _ in range(100):
        advance_waypoint(st, random.Random(0), 1.0)
    assert st.pos == (3.0, 4.0)


@pytest.mark.parametrize("seed", [42, 7, 1234])
def test_trajectory_stays_inside_area(seed):
    rng = rng_mod.stream(seed, "mob-test")
    st = MobilityState.initial(rng, area=(1000.0, 1000.0), speed_range=(2.7778, 6.9444), pause_time=5.0)
    for _ in range(9000):  # 900 s at 0.1 s ticks
        advance_waypoint(st, rng, 0.1)
        assert 0.0 <= st.pos[0] <= 1000.0
        assert 0.0 <= st.pos[1] <= 1000.0


def test_identical_seed_identical_trajectory():
    def run():
        rng = rng_mod.stream(42, "traj")
        st = MobilityState.initial(rng, area=(1000.0, 1000.0), speed_range=(2.7778, 6.9444), pause_time=1.0)
        out = []
        for _ in range(2000):
            advance_waypoint(st, rng, 0.1)
            out.append(st.pos)
        return out

    assert run() == run()  # bit-exact
