"""Vehicle kinematics and the low-level waypoint-tracking controller.

Everything here is a pure function over value types. Speeds are m/s
internally; the drive policy carries the operator-facing km/h figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

# Kinematic bicycle parameters.
WHEELBASE_M = 2.7
MAX_STEER_DEG = 35.0
MAX_DRIVE_ACCEL = 3.0       # m/s^2 at full throttle
MAX_BRAKE_DECEL = 6.0       # m/s^2 at full brake
DRAG_COEFF = 0.1            # 1/s, linear speed damping

TICK_DT = 1.0 / 30.0
TICK_SUBSTEPS = 16

LOOKAHEAD_M = 3.0

SPEED_STEP_KMH = 5
MAX_TARGET_KMH = 60

STOP_SPEED_EPS = 0.01       # m/s, "stopped" threshold


def normalize_yaw(deg: float) -> float:
    """Wrap an angle to [-180, 180)."""
    if not math.isfinite(deg):
        raise ValueError(f"non-finite yaw {deg!r}")
    return (deg + 180.0) % 360.0 - 180.0


def kmh_to_ms(kmh: float) -> float:
    return kmh / 3.6


@dataclass(frozen=True)
class VehicleState:
    position: tuple[float, float]
    yaw: float
    speed: float = 0.0
    lights_on: bool = False
    current_lane: str = ""

    def __post_init__(self):
        vals = (*self.position, self.yaw, self.speed)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite vehicle state {self!r}")


@dataclass(frozen=True)
class ControlSignal:
    throttle: float = 0.0
    steer: float = 0.0
    brake: float = 0.0

    def __post_init__(self):
        assert 0.0 <= self.throttle <= 1.0
        assert -1.0 <= self.steer <= 1.0
        assert 0.0 <= self.brake <= 1.0


@dataclass(frozen=True)
class PidGains:
    speed_kp: float = 0.5
    speed_ki: float = 0.05
    speed_kd: float = 0.0
    lateral_kp: float = 1.2
    lateral_kd: float = 0.3


@dataclass(frozen=True)
class PidState:
    speed_integral: float = 0.0
    prev_speed_error: float = 0.0
    prev_cross_track: float = 0.0


@dataclass(frozen=True)
class DrivePolicy:
    target_speed: int = 20      # km/h, multiple of 5 in [0, 60]
    stopped: bool = False

    def __post_init__(self):
        assert 0 <= self.target_speed <= MAX_TARGET_KMH
        assert self.target_speed % SPEED_STEP_KMH == 0


def integrate(state: VehicleState, u: ControlSignal, dt: float,
              substeps: int = TICK_SUBSTEPS) -> VehicleState:
    """Advance the bicycle model by dt in `substeps` equal sub-intervals.

    Longitudinal dynamics are linear with drag and solved exactly per
    substep, so chaining N substeps equals one call with substeps=N.
    """
    if dt <= 0 or substeps < 1:
        raise ValueError("dt must be > 0 and substeps >= 1")
    h = dt / substeps
    x, y = state.position
    yaw = state.yaw
    v = state.speed
    # brake wins when both pedals are pressed
    throttle = 0.0 if u.brake > 0 else u.throttle
    steer_rad = math.radians(u.steer * MAX_STEER_DEG)
    for _ in range(substeps):
        # dv/dt = a_drive - a_brake - c*v, exact exponential step
        accel = MAX_DRIVE_ACCEL * throttle - MAX_BRAKE_DECEL * u.brake
        v_inf = accel / DRAG_COEFF
        decay = math.exp(-DRAG_COEFF * h)
        v_new = v_inf + (v - v_inf) * decay
        v_new = max(0.0, v_new)
        v_mid = 0.5 * (v + v_new)
        yaw_rate = math.degrees(v_mid / WHEELBASE_M * math.tan(steer_rad))
        yaw_mid = yaw + 0.5 * yaw_rate * h
        x += v_mid * h * math.cos(math.radians(yaw_mid))
        y += v_mid * h * math.sin(math.radians(yaw_mid))
        yaw = yaw + yaw_rate * h
        v = v_new
    return replace(state, position=(x, y), yaw=normalize_yaw(yaw), speed=v)


def _lookahead_index(plan, state: VehicleState) -> int:
    """First plan waypoint at least LOOKAHEAD_M ahead of the vehicle."""
    for i, wp in enumerate(plan):
        if math.dist(wp.position, state.position) >= LOOKAHEAD_M:
            return i
    return len(plan) - 1


def prune_passed(plan, state: VehicleState):
    """Drop leading waypoints the vehicle has already driven past."""
    yaw = math.radians(state.yaw)
    fx, fy = math.cos(yaw), math.sin(yaw)
    i = 0
    while i < len(plan) - 1:
        wp = plan[i]
        dx = wp.position[0] - state.position[0]
        dy = wp.position[1] - state.position[1]
        if dx * fx + dy * fy > 0.2:
            break
        i += 1
    return plan[i:]


def pid_step(pid: PidState, state: VehicleState, plan, policy: DrivePolicy,
             dt: float, gains: PidGains = PidGains(),
             ) -> tuple[ControlSignal, PidState]:
    """One controller step: waypoint plan + policy -> control triple.

    Longitudinal PID on speed error; lateral PD on the heading error to
    the look-ahead waypoint, damped by the cross-track derivative.
    """
    if policy.stopped:
        return ControlSignal(0.0, 0.0, 1.0), PidState()
    if not plan:
        raise ValueError("empty waypoint plan while not stopped")

    target_v = kmh_to_ms(policy.target_speed)
    err = target_v - state.speed
    integral = pid.speed_integral + err * dt
    integral = max(-10.0, min(10.0, integral))
    accel_cmd = (gains.speed_kp * err + gains.speed_ki * integral
                 + gains.speed_kd * (err - pid.prev_speed_error) / dt)
    if accel_cmd >= 0:
        throttle, brake = min(1.0, accel_cmd), 0.0
    else:
        throttle, brake = 0.0, min(1.0, -accel_cmd)

    target = plan[_lookahead_index(plan, state)]
    dx = target.position[0] - state.position[0]
    dy = target.position[1] - state.position[1]
    heading_err = math.radians(
        normalize_yaw(math.degrees(math.atan2(dy, dx)) - state.yaw))
    # signed lateral offset of the target in the vehicle frame
    yaw = math.radians(state.yaw)
    cross = -dx * math.sin(yaw) + dy * math.cos(yaw)
    steer = (gains.lateral_kp * heading_err
             + gains.lateral_kd * (cross - pid.prev_cross_track) / dt)
    steer = max(-1.0, min(1.0, steer))

    new_pid = PidState(integral, err, cross)
    return ControlSignal(throttle, steer, brake), new_pid
