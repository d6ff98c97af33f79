import math

import pytest
from hypothesis import given, settings, strategies as st

from wizdrive.vehicle import (ControlSignal, DrivePolicy, MAX_DRIVE_ACCEL,
                              DRAG_COEFF, PidState, TICK_DT, TICK_SUBSTEPS,
                              VehicleState, integrate, kmh_to_ms,
                              normalize_yaw, pid_step, prune_passed)
from wizdrive.town_map import Waypoint


def test_normalize_yaw_range():
    for deg in (-720, -180, -179.5, 0, 90, 179.9, 180, 359, 1234.5):
        w = normalize_yaw(deg)
        assert -180.0 <= w < 180.0
        # same angle modulo 360
        d = (w - deg) % 360.0
        assert min(d, 360.0 - d) < 1e-9


def test_normalize_yaw_rejects_non_finite():
    with pytest.raises(ValueError):
        normalize_yaw(float("nan"))
    with pytest.raises(ValueError):
        normalize_yaw(float("inf"))


def test_full_throttle_closed_form():
    # oracle: dv/dt = a - c v  =>  v(t) = (a/c)(1 - e^{-ct}) from rest
    a, c = MAX_DRIVE_ACCEL, DRAG_COEFF
    state = VehicleState((0.0, 0.0), 0.0, 0.0)
    u = ControlSignal(throttle=1.0)
    t = 0.0
    for _ in range(300):
        state = integrate(state, u, TICK_DT, TICK_SUBSTEPS)
        t += TICK_DT
        expected = (a / c) * (1.0 - math.exp(-c * t))
        assert state.speed == pytest.approx(expected, abs=1e-6)


def test_substep_chaining_is_exact():
    u = ControlSignal(throttle=0.7, steer=0.2)
    one = VehicleState((1.0, 2.0), 30.0, 4.0)
    whole = integrate(one, u, TICK_DT, TICK_SUBSTEPS)
    piecewise = one
    for _ in range(TICK_SUBSTEPS):
        piecewise = integrate(piecewise, u, TICK_DT / TICK_SUBSTEPS, 1)
    assert whole.position == pytest.approx(piecewise.position, abs=1e-12)
    assert whole.yaw == pytest.approx(piecewise.yaw, abs=1e-12)
    assert whole.speed == pytest.approx(piecewise.speed, abs=1e-12)


def test_brake_wins_over_throttle():
    state = VehicleState((0.0, 0.0), 0.0, 10.0)
    braked = integrate(state, ControlSignal(1.0, 0.0, 1.0), TICK_DT)
    brake_only = integrate(state, ControlSignal(0.0, 0.0, 1.0), TICK_DT)
    assert braked.speed == brake_only.speed
    assert braked.speed < state.speed


def test_speed_never_negative():
    state = VehicleState((0.0, 0.0), 0.0, 0.3)
    for _ in range(120):
        state = integrate(state, ControlSignal(0.0, 0.0, 1.0), TICK_DT)
    assert state.speed == 0.0


def _straight_plan(n=400, spacing=1.0):
    return [Waypoint((i * spacing, 0.0), 0.0, "L", i * spacing)
            for i in range(1, n)]


def test_pid_settles_to_target():
    plan = _straight_plan()
    state = VehicleState((0.0, 0.0), 0.0, 0.0)
    pid = PidState()
    policy = DrivePolicy(target_speed=20)
    target = kmh_to_ms(20)
    settle_tick = None
    for tick in range(12 * 30):
        plan = prune_passed(plan, state)
        u, pid = pid_step(pid, state, plan, policy, TICK_DT)
        state = integrate(state, u, TICK_DT, TICK_SUBSTEPS)
        if abs(state.speed - target) <= 0.05 * target:
            if settle_tick is None:
                settle_tick = tick
        else:
            settle_tick = None
    assert settle_tick is not None and settle_tick <= 8 * 30


def test_pid_stopped_full_brake_and_reset():
    u, pid = pid_step(PidState(5.0, 1.0, 1.0),
                      VehicleState((0, 0), 0.0, 3.0), [],
                      DrivePolicy(stopped=True), TICK_DT)
    assert (u.throttle, u.steer, u.brake) == (0.0, 0.0, 1.0)
    assert pid == PidState()


def test_pid_empty_plan_raises():
    with pytest.raises(ValueError):
        pid_step(PidState(), VehicleState((0, 0), 0.0, 3.0), [],
                 DrivePolicy(), TICK_DT)


def test_prune_passed_drops_behind():
    plan = _straight_plan(10)
    state = VehicleState((4.5, 0.0), 0.0, 1.0)
    remaining = prune_passed(plan, state)
    assert remaining[0].position[0] >= 5.0
    # facing the other way the low-s waypoints are ahead, so none drop
    back = prune_passed(plan, VehicleState((4.5, 0.0), 180.0, 1.0))
    assert len(back) == len(plan)


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e6, 1e6))
def test_normalize_yaw_idempotent(deg):
    w = normalize_yaw(deg)
    assert normalize_yaw(w) == w
    assert -180.0 <= w < 180.0
