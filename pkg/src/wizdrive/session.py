"""Deterministic 30 Hz session engine.

One Session owns the world: vehicle, plan, scenario, exceptions and the
log. All inputs are applied on tick boundaries in arrival order, so a
recorded session replays bit-identically by re-injecting its input
events at their recorded ticks.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, replace
from importlib import resources

from . import maneuver as mv
from .dialogue import (BeliefState, MentalAction, UtteranceEvent,
                       validate_mental)
from .exception_engine import (EnvException, ExceptionError, TaskException,
                               WorldCondition, apply_env, apply_task)
from .scenario import (Role, ScenarioState, StoryboardTemplate, SubgoalStatus,
                       all_done, check_subgoal, complete_subgoal, instantiate,
                       role_view)
from .session_log import (EventKind, LOG_FORMAT_VERSION, LogEvent, SessionLog,
                          SNAPSHOT_EVERY_TICKS, TICKS_PER_SECOND,
                          canonical_json)
from .town_map import TownMap, load_map
from .vehicle import (ControlSignal, DrivePolicy, PidState, TICK_DT,
                      TICK_SUBSTEPS, VehicleState, integrate, pid_step,
                      prune_passed)

REPLAY_EVERY_TICKS = 3        # 30 Hz simulation sampled to 10 FPS
PLAN_EXTEND_THRESHOLD_M = 20.0


def packaged_map(town_id: str) -> TownMap:
    text = resources.files("wizdrive.data.maps").joinpath(
        f"{town_id}.json").read_text()
    return load_map(text)


def packaged_template(name: str) -> StoryboardTemplate:
    text = resources.files("wizdrive.data.templates").joinpath(
        f"{name}.json").read_text()
    return StoryboardTemplate.from_document(text)


@dataclass(frozen=True)
class ReplayFrame:
    t: float
    vehicle: VehicleState
    world: WorldCondition
    subgoal_statuses: tuple[str, ...]
    plan_digest: str

    def to_record(self) -> dict:
        return {
            "t": round(self.t, 6),
            "vehicle": {
                "x": self.vehicle.position[0],
                "y": self.vehicle.position[1],
                "yaw": self.vehicle.yaw,
                "speed": self.vehicle.speed,
                "lights_on": self.vehicle.lights_on,
                "lane": self.vehicle.current_lane,
            },
            "world": {
                "weather": self.world.weather.value,
                "daylight": self.world.daylight.value,
                "blocked": sorted(map(list, self.world.blocked)),
                "obstacles": sorted(map(list, self.world.obstacles)),
            },
            "subgoals": list(self.subgoal_statuses),
            "plan_digest": self.plan_digest,
        }


@dataclass
class Outbound:
    """Message produced during a tick, addressed to one role (or all)."""
    role: Role | None
    type: str
    body: dict


class Session:
    def __init__(self, town: TownMap, template: StoryboardTemplate,
                 seed: int, town_ref: str = "", template_ref: str = ""):
        self.town = town
        self.template = template
        self.seed = seed
        self.scenario: ScenarioState = instantiate(template, town, seed)
        dep = self.scenario.departure
        self.vehicle = VehicleState(dep.position, dep.yaw, 0.0, False,
                                    dep.lane_id)
        self.world = WorldCondition()
        self.policy = DrivePolicy(target_speed=20, stopped=True)
        self.pid = PidState()
        self.plan: mv.WaypointPlan | None = None
        self.pending_jturn: mv.ManeuverCommand | None = None
        self.belief = BeliefState()
        self.tick_count = 0
        header = {"format": LOG_FORMAT_VERSION, "map": town_ref or town.town_id,
                  "template": template_ref, "seed": seed}
        self.log = SessionLog(header)
        self.outbox: list[Outbound] = []
        self._pending: list[tuple[Role, str, dict]] = []
        self._snapshot()   # tick-0 keyframe

    # -- event logging ---------------------------------------------------

    def _append(self, kind: EventKind, payload: dict) -> LogEvent:
        seq = self.log.events[-1].seq + 1 if self.log.events else 0
        e = LogEvent(seq, self.tick_count, kind, payload)
        self.log.append(e)
        return e

    def _snapshot(self) -> None:
        self._append(EventKind.WORLD_SNAPSHOT, {
            "vehicle": {
                "x": self.vehicle.position[0], "y": self.vehicle.position[1],
                "yaw": self.vehicle.yaw, "speed": self.vehicle.speed,
                "lights_on": self.vehicle.lights_on,
                "lane": self.vehicle.current_lane,
            },
            "world": {
                "weather": self.world.weather.value,
                "daylight": self.world.daylight.value,
                "blocked": sorted(map(list, self.world.blocked)),
                "obstacles": sorted(map(list, self.world.obstacles)),
            },
            "subgoals": [sg.status.value for sg in self.scenario.subgoals],
        })

    # -- command intake --------------------------------------------------

    def submit(self, role: Role, msg_type: str, body: dict) -> None:
        """Queue a client message; it takes effect on the next tick."""
        self._pending.append((role, msg_type, body))

    def _apply_command(self, role: Role, msg_type: str, body: dict) -> None:
        if msg_type == "command":
            self._apply_maneuver(mv.ManeuverCommand.from_wire(body))
        elif msg_type == "mental":
            action = MentalAction.from_wire(body)
            validate_mental(action, self.town)
            self.belief.apply(action)
            self._append(EventKind.MENTAL_ACTION, action.to_wire())
        elif msg_type == "chat":
            self._apply_chat(role, body)
        elif msg_type == "env_exception":
            e = EnvException.from_wire(body)
            self.world = apply_env(self.world, e, self.town)
            self._append(EventKind.ENV_EXCEPTION, e.to_wire())
            self._retruncate_plan()
        elif msg_type == "task_exception":
            e = TaskException.from_wire(body)
            self.scenario, prompt = apply_task(self.scenario, e, self.town)
            self._append(EventKind.TASK_EXCEPTION, e.to_wire())
            self.outbox.append(Outbound(Role.PARTICIPANT, "prompt",
                                        {"text": prompt}))
            self.outbox.append(Outbound(Role.PARTICIPANT, "task_update",
                                        role_view(self.scenario,
                                                  Role.PARTICIPANT)))
        else:
            raise ValueError(f"unknown message type {msg_type!r}")

    def _apply_chat(self, role: Role, body: dict) -> None:
        payload = dict(body)
        payload.setdefault("speaker",
                           "HUM" if role is Role.PARTICIPANT else "BOT")
        payload.setdefault("t_start", round(self.now, 6))
        payload.setdefault("t_end", round(self.now, 6))
        payload.setdefault("spans", [])
        payload.setdefault("tu_id", "")
        # self-initiating utterances name their own EU by log sequence
        next_seq = self.log.events[-1].seq + 1 if self.log.events else 0
        if not payload.get("eu_id"):
            payload["eu_id"] = str(next_seq)
        self._append(EventKind.UTTERANCE, payload)
        target = Role.CO_WIZARD if role is Role.PARTICIPANT \
            else Role.PARTICIPANT
        self.outbox.append(Outbound(target, "chat", dict(payload)))
        # the Ad-Wizard observes the dialogue read-only
        self.outbox.append(Outbound(Role.AD_WIZARD, "chat", dict(payload)))

    def _apply_maneuver(self, cmd: mv.ManeuverCommand) -> None:
        if cmd.kind is mv.ManeuverKind.SPEED_CHANGE:
            self.policy = mv.apply_speed_change(self.policy, cmd.speed_arg)
        elif cmd.kind is mv.ManeuverKind.LIGHT_CHANGE:
            self.vehicle = mv.apply_light_change(self.vehicle, cmd.light_arg)
        elif cmd.kind is mv.ManeuverKind.STOP:
            self.policy = replace(self.policy, stopped=True)
            self.plan = mv.plan_maneuver(self.town, self.vehicle, cmd)
            self.pending_jturn = None
        else:
            # only Start clears the stop latch
            if cmd.kind is mv.ManeuverKind.START:
                self.policy = replace(self.policy, stopped=False)
            try:
                self.plan = mv.plan_maneuver(self.town, self.vehicle, cmd,
                                             blocked=self.world.blocked)
                self.pending_jturn = None
            except mv.NoJunctionInHorizon:
                if cmd.kind is mv.ManeuverKind.J_TURN:
                    # latch until the junction enters the horizon
                    self.pending_jturn = cmd
                else:
                    raise
        self._append(EventKind.MANEUVER_CMD, cmd.to_wire())

    def _retruncate_plan(self) -> None:
        """Re-plan the active command after a roadblock lands on it."""
        if self.plan is None or self.plan.terminal:
            return
        cmd = self.plan.source_command
        try:
            self.plan = mv.plan_maneuver(self.town, self.vehicle, cmd,
                                         blocked=self.world.blocked)
        except mv.ManeuverError:
            self.plan = mv.plan_maneuver(
                self.town, self.vehicle,
                mv.ManeuverCommand(mv.ManeuverKind.LANE_FOLLOW),
                blocked=self.world.blocked)

    # -- simulation ------------------------------------------------------

    @property
    def now(self) -> float:
        return self.tick_count / TICKS_PER_SECOND

    def _plan_remaining_m(self) -> float:
        if not self.plan or not self.plan.waypoints:
            return 0.0
        pts = [self.vehicle.position] + [wp.position
                                         for wp in self.plan.waypoints]
        return sum(
            ((b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2) ** 0.5
            for a, b in zip(pts, pts[1:]))

    def _maybe_extend_plan(self) -> None:
        if self.plan is None or self.plan.terminal or self.plan.blocked_ahead:
            return
        if self._plan_remaining_m() >= PLAN_EXTEND_THRESHOLD_M:
            return
        tail = self.plan.waypoints[-1] if self.plan.waypoints else None
        if tail is None or not tail.lane_id:
            return
        lane = self.town.lane(tail.lane_id)
        # connector-curve waypoints carry s=0; project them onto the lane
        s_from = tail.s if tail.s > 0.0 \
            else mv._lane_entry_s(lane, tail.position)
        ext, hit = mv._follow(
            self.town, lane, s_from, mv.DEFAULT_HORIZON_M,
            self.world.blocked,
            lambda lid: mv._straightest_exit(self.town, lid))
        if ext:
            self.plan = replace(self.plan,
                                waypoints=self.plan.waypoints + tuple(ext),
                                blocked_ahead=hit)
        elif hit:
            self.plan = replace(self.plan, blocked_ahead=True)

    def _retry_pending_jturn(self) -> None:
        if self.pending_jturn is None:
            return
        try:
            self.plan = mv.plan_maneuver(self.town, self.vehicle,
                                         self.pending_jturn,
                                         blocked=self.world.blocked)
            self.pending_jturn = None
        except mv.ManeuverError:
            pass

    def step(self) -> ReplayFrame | None:
        """Advance one tick; returns a frame on every third tick."""
        if self.tick_count % SNAPSHOT_EVERY_TICKS == 0 and self.tick_count:
            self._snapshot()

        pending, self._pending = self._pending, []
        for role, msg_type, body in pending:
            try:
                self._apply_command(role, msg_type, body)
            except (mv.ManeuverError, ExceptionError, ValueError) as e:
                # refused inputs never reach the log; the sender hears why
                code = getattr(e, "code", "rejected")
                self.outbox.append(Outbound(role, "error",
                                            {"code": code,
                                             "detail": str(e)}))

        self._retry_pending_jturn()
        self._maybe_extend_plan()

        active = None
        if self.plan is not None and not self.plan.terminal:
            active = prune_passed(self.plan.waypoints, self.vehicle)
            if active and active[0].lane_id:
                self.vehicle = replace(self.vehicle,
                                       current_lane=active[0].lane_id)
            self.plan = replace(self.plan, waypoints=tuple(active))

        hold = (self.policy.stopped or not active
                or (self.plan.blocked_ahead
                    and self._plan_remaining_m() < 1.0))
        if hold:
            control = ControlSignal(0.0, 0.0, 1.0)
            self.pid = PidState()
        else:
            control, self.pid = pid_step(self.pid, self.vehicle, active,
                                         self.policy, TICK_DT)
        self._append(EventKind.CONTROL, {
            "throttle": control.throttle, "steer": control.steer,
            "brake": control.brake,
        })
        self.vehicle = integrate(self.vehicle, control, TICK_DT,
                                 TICK_SUBSTEPS)
        self.tick_count += 1

        self._check_subgoals()

        if self.tick_count % REPLAY_EVERY_TICKS == 0:
            return self.frame()
        return None

    def _check_subgoals(self) -> None:
        for i, sg in enumerate(self.scenario.subgoals):
            if sg.status not in (SubgoalStatus.PENDING,
                                 SubgoalStatus.ONGOING):
                continue
            if check_subgoal(self.vehicle, self.town, sg):
                complete_subgoal(self.scenario, i)
                self._append(EventKind.SUBGOAL_STATUS,
                             {"index": i,
                              "status": SubgoalStatus.COMPLETE.value})
                self.outbox.append(Outbound(
                    Role.PARTICIPANT, "task_update",
                    role_view(self.scenario, Role.PARTICIPANT)))

    def frame(self) -> ReplayFrame:
        digest = hashlib.sha256()
        if self.plan:
            for wp in self.plan.waypoints:
                digest.update(canonical_json(
                    [wp.position[0], wp.position[1], wp.yaw]).encode())
        return ReplayFrame(self.now, self.vehicle, self.world,
                           tuple(sg.status.value
                                 for sg in self.scenario.subgoals),
                           digest.hexdigest()[:16])

    def drain_outbox(self) -> list[Outbound]:
        out, self.outbox = self.outbox, []
        return out

    def done(self) -> bool:
        return all_done(self.scenario)


# -- record / replay -----------------------------------------------------

INPUT_KINDS = {
    EventKind.MANEUVER_CMD: "command",
    EventKind.MENTAL_ACTION: "mental",
    EventKind.UTTERANCE: "chat",
    EventKind.ENV_EXCEPTION: "env_exception",
    EventKind.TASK_EXCEPTION: "task_exception",
}

_UTTERANCE_ROLE = {"HUM": Role.PARTICIPANT, "BOT": Role.CO_WIZARD}


def session_from_header(header: dict) -> Session:
    town = load_map(header["map_doc"]) if "map_doc" in header \
        else packaged_map(header["map"])
    if "template_doc" in header:
        template = StoryboardTemplate.from_document(header["template_doc"])
    else:
        template = packaged_template(header["template"])
    return Session(town, template, header["seed"],
                   town_ref=header["map"], template_ref=header["template"])


def replay(log: SessionLog):
    """Re-simulate a recorded session, yielding 10 FPS frames."""
    sess = session_from_header(log.header)
    inputs: dict[int, list[tuple[Role, str, dict]]] = {}
    last_tick = 0
    for e in log.events:
        last_tick = max(last_tick, e.tick)
        msg_type = INPUT_KINDS.get(e.kind)
        if msg_type is None:
            continue
        if e.kind is EventKind.UTTERANCE:
            role = _UTTERANCE_ROLE[e.payload["speaker"]]
            payload = {k: v for k, v in e.payload.items()}
        elif e.kind is EventKind.ENV_EXCEPTION \
                or e.kind is EventKind.TASK_EXCEPTION:
            role = Role.AD_WIZARD
            payload = e.payload
        else:
            role = Role.CO_WIZARD
            payload = e.payload
        inputs.setdefault(e.tick, []).append((role, msg_type, payload))

    while sess.tick_count <= last_tick:
        for item in inputs.get(sess.tick_count, []):
            sess.submit(*item)
        frame = sess.step()
        sess.drain_outbox()
        if frame is not None:
            yield frame


def replay_jsonl(log: SessionLog) -> str:
    lines = [canonical_json(f.to_record()) for f in replay(log)]
    return "\n".join(lines) + "\n" if lines else ""


def frames_digest(frames_jsonl: str) -> str:
    return hashlib.sha256(frames_jsonl.encode()).hexdigest()
