"""Scripted driver: a greedy waypoint chaser that turns a storyboard
into a co-wizard command script by steering a live session.

This is tooling for fixtures and demos, not part of the platform
contract: the generated script replays through the normal protocol
path like any hand-written one.
"""

from __future__ import annotations

import heapq
import math

from .maneuver import _lane_entry_s
from .scenario import Role, SubgoalStatus
from .server import dispatch
from .session import Session
from .town_map import TownMap, landmark_anchor
from .vehicle import DRAG_COEFF, MAX_BRAKE_DECEL, STOP_SPEED_EPS, TICK_DT

CRUISE_KMH = 20
APPROACH_KMH = 10
CREEP_KMH = 5


def stopping_distance(v: float) -> float:
    """Travel under full brake with linear drag, solved in closed form."""
    if v <= 0:
        return 0.0
    v_inf = MAX_BRAKE_DECEL / DRAG_COEFF
    return v / DRAG_COEFF - (v_inf / DRAG_COEFF) * math.log1p(v / v_inf)


def lane_route(m: TownMap, start_lane: str, s_start: float,
               target_lane: str, s_target: float,
               blocked_lanes: frozenset) -> list[str] | None:
    """Lane id sequence from the current position to the target point;
    None when unreachable without entering a blocked lane."""
    if start_lane == target_lane and s_target >= s_start - 0.5:
        return [start_lane]
    first = m.lane(start_lane)
    pq = [(first.length - s_start, start_lane, (start_lane,))]
    settled = set()
    while pq:
        cost, lid, path = heapq.heappop(pq)
        if lid in settled:
            continue
        settled.add(lid)
        for _jid, conn in m.exits(lid):
            nxt = conn.out_lane
            if nxt in blocked_lanes:
                continue
            if nxt == target_lane:
                return list(path) + [nxt]
            if nxt not in settled:
                heapq.heappush(pq, (cost + m.lane(nxt).length, nxt,
                                    path + (nxt,)))
    return None


class Autopilot:
    def __init__(self, session: Session):
        self.session = session
        self.town = session.town
        self.script: list[dict] = []
        self.phase = "drive"
        self.settle = 0
        self._route: list[str] | None = None
        self._route_key = None

    def _send(self, role: Role, msg: dict) -> None:
        err = dispatch(self.session, role, msg)
        if err is not None:
            raise RuntimeError(f"autopilot message refused: {err}")
        self.script.append({"tick": self.session.tick_count,
                            "role": role.value, **msg})

    def _target(self):
        for i, sg in enumerate(self.session.scenario.subgoals):
            if sg.status in (SubgoalStatus.PENDING, SubgoalStatus.ONGOING):
                return i, landmark_anchor(self.town, sg.landmark)
        return None, None

    def _ensure_route(self, anchor, target_index: int) -> None:
        v = self.session.vehicle
        key = (v.current_lane, target_index,
               self.session.world.blocked_lane_ids())
        if key == self._route_key and self._route is not None:
            return
        self._route_key = key
        lane = self.town.lane(v.current_lane)
        s_now = _lane_entry_s(lane, v.position)
        route = lane_route(self.town, v.current_lane, s_now,
                           anchor.lane_id, anchor.s,
                           self.session.world.blocked_lane_ids())
        if route is None:
            raise RuntimeError(
                f"no route from {v.current_lane} to {anchor.lane_id}")
        self._route = route
        if len(route) >= 2:
            for _jid, conn in self.town.exits(route[0]):
                if conn.out_lane == route[1]:
                    self._send(Role.CO_WIZARD,
                               {"type": "command", "cmd": "JTurn",
                                "angle": conn.turn_yaw_delta})
                    break

    def _adjust_speed(self, desired_kmh: int) -> bool:
        cur = self.session.policy.target_speed
        if cur == desired_kmh:
            return False
        delta = 5 if desired_kmh > cur else -5
        self._send(Role.CO_WIZARD,
                   {"type": "command", "cmd": "SpeedChange", "speed": delta})
        return True

    def tick(self) -> None:
        """Decide this tick's commands; call before session.step()."""
        sess = self.session
        idx, anchor = self._target()
        if idx is None:
            return
        v = sess.vehicle

        if self.phase == "stopping":
            if v.speed <= STOP_SPEED_EPS:
                self.settle += 1
                if self.settle < 3:
                    return
                self.settle = 0
                # whether the stop landed or we must creep closer, resume;
                # a landed stop flips the target to the next subgoal
                self.phase = "drive"
                self._route_key = None
                self._send(Role.CO_WIZARD, {"type": "command", "cmd": "Start"})
            return

        self._ensure_route(anchor, idx)
        on_target = (self._route == [v.current_lane]
                     and v.current_lane == anchor.lane_id)
        if on_target:
            s_now = _lane_entry_s(self.town.lane(v.current_lane), v.position)
            remaining = anchor.s - s_now
            desired = CRUISE_KMH
            if remaining < 30.0:
                desired = APPROACH_KMH
            if remaining < 8.0:
                desired = CREEP_KMH
            if self._adjust_speed(desired):
                return
            margin = stopping_distance(v.speed) + v.speed * TICK_DT + 0.05
            if remaining <= margin:
                self._send(Role.CO_WIZARD, {"type": "command", "cmd": "Stop"})
                self.phase = "stopping"
        else:
            self._adjust_speed(CRUISE_KMH)


def generate_script(session: Session, inject: bool = True,
                    max_ticks: int = 60000) -> list[dict]:
    """Drive the session to storyboard completion, returning the
    replayable script. With inject=True the script also carries one
    Delete task exception and one mid-route Roadblock."""
    ap = Autopilot(session)
    ap._send(Role.CO_WIZARD, {"type": "command", "cmd": "Start"})
    did_delete = not inject
    did_block = not inject
    first_done_tick = None

    while not session.done() and session.tick_count < max_ticks:
        statuses = [sg.status for sg in session.scenario.subgoals]
        if first_done_tick is None \
                and SubgoalStatus.COMPLETE in statuses:
            first_done_tick = session.tick_count
        if first_done_tick is not None:
            since = session.tick_count - first_done_tick
            if not did_delete and since >= 5:
                did_delete = True
                for i, sg in enumerate(session.scenario.subgoals):
                    if sg.status is SubgoalStatus.PENDING \
                            and i != session.scenario.final_destination_index:
                        ap._send(Role.AD_WIZARD, {
                            "type": "task_exception", "exc": "DeleteSubgoal",
                            "target": i,
                            "prompt": "Change of plans: skip that stop."})
                        break
            if not did_block and since >= 30:
                lane_id = _pick_block_lane(ap)
                if lane_id is not None:
                    did_block = True
                    lane = session.town.lane(lane_id)
                    ap._send(Role.AD_WIZARD, {
                        "type": "env_exception", "exc": "Roadblock",
                        "lane": lane_id, "s_from": 0.0,
                        "s_to": lane.length})
        ap.tick()
        session.step()
        session.drain_outbox()
    if not session.done():
        raise RuntimeError(f"storyboard unfinished after {max_ticks} ticks")
    return ap.script


def _pick_block_lane(ap: Autopilot) -> str | None:
    """A route lane two hops ahead that still leaves an alternative."""
    sess = ap.session
    idx, anchor = ap._target()
    if idx is None or ap._route is None or len(ap._route) < 4:
        return None
    v = sess.vehicle
    s_now = _lane_entry_s(sess.town.lane(v.current_lane), v.position)
    for cand in ap._route[2:-1]:
        alt = lane_route(sess.town, v.current_lane, s_now,
                         anchor.lane_id, anchor.s,
                         sess.world.blocked_lane_ids() | {cand})
        if alt is not None:
            return cand
    return None
