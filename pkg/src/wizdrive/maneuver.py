"""Rule-based local trajectory planner for the discrete driving actions.

Each physical action maps to a short waypoint trajectory; adaptive and
epistemic actions rewrite the drive policy / light state instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

from .town_map import Lane, TownMap, Waypoint
from .vehicle import (DrivePolicy, MAX_TARGET_KMH, SPEED_STEP_KMH,
                      VehicleState, normalize_yaw)

DEFAULT_HORIZON_M = 60.0
LANE_CHANGE_LENGTH_M = 10.0
ROADBLOCK_STOP_MARGIN_M = 5.0
CONNECTOR_STEP_M = 1.0
UTURN_STEP_DEG = 10.0


class ManeuverKind(str, Enum):
    LANE_FOLLOW = "LaneFollow"
    LANE_SWITCH = "LaneSwitch"
    J_TURN = "JTurn"
    U_TURN = "UTurn"
    STOP = "Stop"
    START = "Start"
    SPEED_CHANGE = "SpeedChange"
    LIGHT_CHANGE = "LightChange"


NAV_KINDS = (ManeuverKind.LANE_FOLLOW, ManeuverKind.LANE_SWITCH,
             ManeuverKind.J_TURN, ManeuverKind.U_TURN,
             ManeuverKind.STOP, ManeuverKind.START)


class ManeuverError(Exception):
    """Refusal of a physical action; surfaced verbatim to the operator."""
    code = "maneuver_error"


class NoNeighborLane(ManeuverError):
    code = "no_neighbor_lane"


class NoJunctionInHorizon(ManeuverError):
    code = "no_junction_in_horizon"


class NoOppositeLane(ManeuverError):
    code = "no_opposite_lane"


class NoMatchingConnector(ManeuverError):
    code = "no_matching_connector"


@dataclass(frozen=True)
class ManeuverCommand:
    kind: ManeuverKind
    angle_arg: float | None = None     # LaneSwitch / JTurn
    speed_arg: int | None = None       # SpeedChange, +/-5
    light_arg: bool | None = None      # LightChange

    def __post_init__(self):
        wants_angle = self.kind in (ManeuverKind.LANE_SWITCH,
                                    ManeuverKind.J_TURN)
        if wants_angle != (self.angle_arg is not None):
            raise ValueError(f"{self.kind.value} angle argument mismatch")
        if (self.kind is ManeuverKind.SPEED_CHANGE) != (self.speed_arg is not None):
            raise ValueError(f"{self.kind.value} speed argument mismatch")
        if (self.kind is ManeuverKind.LIGHT_CHANGE) != (self.light_arg is not None):
            raise ValueError(f"{self.kind.value} light argument mismatch")
        if self.speed_arg is not None and \
                self.speed_arg not in (-SPEED_STEP_KMH, SPEED_STEP_KMH):
            raise ValueError(f"speed delta must be +/-{SPEED_STEP_KMH}, "
                             f"got {self.speed_arg}")
        if self.angle_arg is not None:
            object.__setattr__(self, "angle_arg", normalize_yaw(self.angle_arg))

    def to_wire(self) -> dict:
        msg = {"cmd": self.kind.value}
        if self.angle_arg is not None:
            msg["angle"] = self.angle_arg
        if self.speed_arg is not None:
            msg["speed"] = self.speed_arg
        if self.light_arg is not None:
            msg["light"] = "on" if self.light_arg else "off"
        return msg

    @classmethod
    def from_wire(cls, msg: dict) -> "ManeuverCommand":
        kind = ManeuverKind(msg["cmd"])
        light = msg.get("light")
        return cls(kind,
                   angle_arg=msg.get("angle"),
                   speed_arg=msg.get("speed"),
                   light_arg=None if light is None else light == "on")


@dataclass(frozen=True)
class WaypointPlan:
    waypoints: tuple[Waypoint, ...]
    source_command: ManeuverCommand
    terminal: bool = False
    blocked_ahead: bool = False

    def __post_init__(self):
        if not self.terminal and not self.waypoints:
            raise ValueError("non-terminal plan must have waypoints")


BlockedInterval = tuple[str, float, float]   # lane id, s_lo, s_hi


def _blocked_on(lane_id: str, blocked: frozenset[BlockedInterval]):
    return sorted((lo, hi) for lid, lo, hi in blocked if lid == lane_id)


def _lane_entry_s(lane: Lane, position) -> float:
    """Arc-length of the point on the lane closest to position."""
    best_s, best_d = 0.0, float("inf")
    wps = lane.waypoints
    for i in range(len(wps) - 1):
        ax, ay = wps[i].position
        bx, by = wps[i + 1].position
        vx, vy = bx - ax, by - ay
        seg = vx * vx + vy * vy
        t = ((position[0] - ax) * vx + (position[1] - ay) * vy) / seg
        t = max(0.0, min(1.0, t))
        px, py = ax + t * vx, ay + t * vy
        d = math.dist(position, (px, py))
        if d < best_d:
            best_d = d
            best_s = wps[i].s + t * (wps[i + 1].s - wps[i].s)
    return best_s


def _hermite(p0, yaw0, p1, yaw1, step: float):
    """Cubic blend between two poses, sampled roughly every `step` meters."""
    chord = math.dist(p0, p1)
    t0 = (math.cos(math.radians(yaw0)) * chord,
          math.sin(math.radians(yaw0)) * chord)
    t1 = (math.cos(math.radians(yaw1)) * chord,
          math.sin(math.radians(yaw1)) * chord)
    n = max(2, int(math.ceil(chord / step)) + 1)
    pts = []
    for k in range(1, n + 1):
        t = k / n
        h00 = 2 * t**3 - 3 * t**2 + 1
        h10 = t**3 - 2 * t**2 + t
        h01 = -2 * t**3 + 3 * t**2
        h11 = t**3 - t**2
        x = h00 * p0[0] + h10 * t0[0] + h01 * p1[0] + h11 * t1[0]
        y = h00 * p0[1] + h10 * t0[1] + h01 * p1[1] + h11 * t1[1]
        dx = ((6 * t**2 - 6 * t) * p0[0] + (3 * t**2 - 4 * t + 1) * t0[0]
              + (-6 * t**2 + 6 * t) * p1[0] + (3 * t**2 - 2 * t) * t1[0])
        dy = ((6 * t**2 - 6 * t) * p0[1] + (3 * t**2 - 4 * t + 1) * t0[1]
              + (-6 * t**2 + 6 * t) * p1[1] + (3 * t**2 - 2 * t) * t1[1])
        pts.append(((x, y), normalize_yaw(math.degrees(math.atan2(dy, dx)))))
    return pts


def _lane_slice(lane: Lane, s_from: float, s_to: float):
    """Lane waypoints in (s_from, s_to], densified to the lane's spacing."""
    out = []
    for wp in lane.waypoints:
        if s_from < wp.s <= s_to:
            out.append(wp)
    return out


def _straightest_exit(m: TownMap, lane_id: str):
    exits = m.exits(lane_id)
    if not exits:
        return None
    return min(exits, key=lambda jc: (abs(jc[1].turn_yaw_delta),
                                      jc[0], jc[1].out_lane))


def _follow(m: TownMap, lane: Lane, s0: float, horizon: float,
            blocked: frozenset[BlockedInterval],
            chooser) -> tuple[list[Waypoint], bool]:
    """Collect waypoints along lanes, crossing junctions via `chooser`.

    Returns (waypoints, blocked_ahead). Truncates 5 m short of any
    blocked interval on the way.
    """
    out: list[Waypoint] = []
    remaining = horizon
    s = s0
    while remaining > 0:
        stop_at = lane.length
        hit_block = False
        for lo, hi in _blocked_on(lane.lane_id, blocked):
            if hi > s:
                stop_at = min(stop_at, lo - ROADBLOCK_STOP_MARGIN_M)
                hit_block = True
                break
        end = min(stop_at, s + remaining)
        seg = _lane_slice(lane, s, end)
        out.extend(seg)
        remaining -= end - s
        if hit_block:
            return out, True
        if end < lane.length or remaining <= 0:
            return out, False
        choice = chooser(lane.lane_id)
        if choice is None:
            return out, False
        _, conn = choice
        nxt = m.lane(conn.out_lane)
        last_pose = out[-1] if out else lane.waypoints[-1]
        curve = _hermite(last_pose.position, last_pose.yaw,
                         nxt.waypoints[0].position, nxt.waypoints[0].yaw,
                         CONNECTOR_STEP_M)
        for (pos, yaw) in curve[:-1]:
            out.append(Waypoint(pos, yaw, conn.out_lane, 0.0))
        remaining -= sum(math.dist(a[0], b[0])
                         for a, b in zip(curve, curve[1:]))
        lane, s = nxt, 0.0
    return out, False


def plan_maneuver(m: TownMap, state: VehicleState, cmd: ManeuverCommand,
                  horizon: float = DEFAULT_HORIZON_M,
                  blocked: frozenset[BlockedInterval] = frozenset(),
                  ) -> WaypointPlan:
    """Expand a physical action into a drivable waypoint trajectory."""
    if cmd.kind not in NAV_KINDS:
        raise ValueError(f"{cmd.kind.value} is not a trajectory action")
    if cmd.kind is ManeuverKind.STOP:
        return WaypointPlan((), cmd, terminal=True)

    lane = m.lane(state.current_lane)
    s0 = _lane_entry_s(lane, state.position)

    if cmd.kind in (ManeuverKind.LANE_FOLLOW, ManeuverKind.START):
        wps, hit = _follow(m, lane, s0, horizon, blocked,
                           lambda lid: _straightest_exit(m, lid))
        if not wps:
            wps = [lane.waypoints[-1]]
        return WaypointPlan(tuple(wps), cmd, blocked_ahead=hit)

    if cmd.kind is ManeuverKind.LANE_SWITCH:
        side = 1 if cmd.angle_arg >= 0 else -1
        target = m.neighbor_lane(lane.lane_id, side)
        if target is None:
            raise NoNeighborLane(
                f"no {'left' if side > 0 else 'right'} neighbor for "
                f"{lane.lane_id}")
        s_end = min(s0 + LANE_CHANGE_LENGTH_M, lane.length)
        entry = m.lane(target.lane_id)
        s_target = _lane_entry_s(entry, lane.waypoint_at(s_end).position)
        goal = entry.waypoint_at(s_target)
        curve = _hermite(state.position, state.yaw, goal.position, goal.yaw,
                         1.0)
        wps = [Waypoint(pos, yaw, target.lane_id, 0.0)
               for pos, yaw in curve[:-1]]
        tail, hit = _follow(m, entry, s_target, horizon, blocked,
                            lambda lid: _straightest_exit(m, lid))
        wps.extend(tail)
        if not wps:
            wps = [goal]
        return WaypointPlan(tuple(wps), cmd, blocked_ahead=hit)

    if cmd.kind is ManeuverKind.U_TURN:
        target = m.opposite_lane(lane.lane_id)
        if target is None:
            raise NoOppositeLane(f"no opposite lane for {lane.lane_id}")
        s_t = _lane_entry_s(target, state.position)
        goal = target.waypoint_at(s_t)
        # half-circle from current pose onto the reverse lane
        cx = 0.5 * (state.position[0] + goal.position[0])
        cy = 0.5 * (state.position[1] + goal.position[1])
        r = 0.5 * math.dist(state.position, goal.position)
        a0 = math.atan2(state.position[1] - cy, state.position[0] - cx)
        # turn towards the opposite lane through the half plane ahead
        fwd = math.radians(state.yaw)
        ccw = (math.cos(fwd) * (goal.position[1] - state.position[1])
               - math.sin(fwd) * (goal.position[0] - state.position[0])) > 0
        sweep = math.pi if ccw else -math.pi
        steps = max(4, int(abs(sweep) / math.radians(UTURN_STEP_DEG)))
        wps = []
        for k in range(1, steps + 1):
            ang = a0 + sweep * k / steps
            pos = (cx + r * math.cos(ang), cy + r * math.sin(ang))
            tangent = math.degrees(ang) + (90.0 if ccw else -90.0)
            wps.append(Waypoint(pos, normalize_yaw(tangent),
                                target.lane_id, 0.0))
        tail, hit = _follow(m, target, s_t, horizon, blocked,
                            lambda lid: _straightest_exit(m, lid))
        wps.extend(tail)
        return WaypointPlan(tuple(wps), cmd, blocked_ahead=hit)

    # JTurn: reach the next junction within the horizon, take the
    # connector whose yaw delta is nearest the argument.
    assert cmd.kind is ManeuverKind.J_TURN
    probe_lane, probe_s, travelled = lane, s0, 0.0
    while True:
        dist_to_end = probe_lane.length - probe_s
        if travelled + dist_to_end > horizon:
            raise NoJunctionInHorizon(
                f"no junction within {horizon:g} m of {lane.lane_id}")
        exits = m.exits(probe_lane.lane_id)
        if exits:
            break
        travelled += dist_to_end
        nxt = _straightest_exit(m, probe_lane.lane_id)
        if nxt is None:
            raise NoJunctionInHorizon(
                f"lane {probe_lane.lane_id} dead-ends before a junction")
        probe_lane, probe_s = m.lane(nxt[1].out_lane), 0.0

    # among equal-angle candidates, prefer an out-lane with no roadblock
    blocked_ids = {lid for lid, _, _ in blocked}
    best = min(exits, key=lambda jc: (abs(normalize_yaw(
        jc[1].turn_yaw_delta - cmd.angle_arg)),
        jc[1].out_lane in blocked_ids, jc[0], jc[1].out_lane))
    jid, conn = best
    if abs(normalize_yaw(conn.turn_yaw_delta - cmd.angle_arg)) > 90.0:
        raise NoMatchingConnector(
            f"no connector within 90 deg of {cmd.angle_arg:g} at {jid}")

    taken = {probe_lane.lane_id: best}

    def chooser(lid):
        return taken.get(lid) or _straightest_exit(m, lid)

    wps, hit = _follow(m, lane, s0, horizon, blocked, chooser)
    if not wps:
        wps = [lane.waypoints[-1]]
    return WaypointPlan(tuple(wps), cmd, blocked_ahead=hit)


def apply_speed_change(policy: DrivePolicy, delta: int) -> DrivePolicy:
    """Bump the cruise speed by +/-5 km/h, clamped to [0, 60]."""
    if delta not in (-SPEED_STEP_KMH, SPEED_STEP_KMH):
        raise ValueError(f"speed delta must be +/-{SPEED_STEP_KMH}, "
                         f"got {delta}")
    new = max(0, min(MAX_TARGET_KMH, policy.target_speed + delta))
    return replace(policy, target_speed=new)


def apply_light_change(state: VehicleState, on: bool) -> VehicleState:
    """Set the front light; the pose is untouched."""
    return replace(state, lights_on=on)
