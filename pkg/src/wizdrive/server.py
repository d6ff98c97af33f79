"""Session host: a websocket server for live operation and a scripted
runner that drives the same validation and dispatch path in-process."""

from __future__ import annotations

import asyncio
import json

from .protocol import (ProtocolError, parse_message, validate_client_message,
                       validate_join)
from .scenario import Role, role_view
from .session import Outbound, Session, packaged_map, packaged_template
from .session_log import TICKS_PER_SECOND, canonical_json
from .town_map import load_map


def build_session(town_ref: str, template_ref: str, seed: int,
                  map_path=None, template_path=None) -> Session:
    if map_path:
        with open(map_path, encoding="utf-8") as fh:
            town = load_map(fh.read())
    else:
        town = packaged_map(town_ref)
    if template_path:
        from .scenario import StoryboardTemplate
        with open(template_path, encoding="utf-8") as fh:
            template = StoryboardTemplate.from_document(fh.read())
    else:
        template = packaged_template(template_ref)
    return Session(town, template, seed,
                   town_ref=town_ref, template_ref=template_ref)


def map_geometry(town) -> dict:
    """Street-level geometry for the aerial view. Lane polylines and
    junction click-targets are not role-scoped; landmark positions are
    and stay in the role view."""
    lanes = []
    street_of = {}
    for road in town.roads:
        for lane in road.lanes:
            street_of[lane.lane_id] = road.street
    for lane in town.lanes:
        lanes.append({
            "id": lane.lane_id,
            "street": street_of.get(lane.lane_id, ""),
            "points": [[wp.position[0], wp.position[1]]
                       for wp in lane.waypoints],
        })
    junctions = []
    for j in town.junctions:
        pts = [town.lane(c.in_lane).waypoints[-1].position
               for c in j.connectors]
        x = sum(p[0] for p in pts) / len(pts)
        y = sum(p[1] for p in pts) / len(pts)
        junctions.append({"id": j.junction_id, "x": x, "y": y})
    return {"town": town.town_id, "lanes": lanes, "junctions": junctions}


def welcome_message(session: Session, role: Role) -> dict:
    msg = {
        "type": "welcome",
        "role": role.value,
        "view": role_view(session.scenario, role),
        "recommended_speed_kmh": session.world.recommended_speed_kmh(),
        "map_geometry": map_geometry(session.town),
    }
    if role is not Role.PARTICIPANT:
        # both wizards see the street network; landmark visibility is
        # already scoped by the role view
        msg["map"] = session.town.town_id
    return msg


def state_message(session: Session, role: Role | None = None) -> dict:
    msg = {"type": "state", **session.frame().to_record()}
    if role is Role.CO_WIZARD and session.plan is not None:
        # planned waypoints are a co-wizard-only overlay
        msg["plan"] = [[wp.position[0], wp.position[1]]
                       for wp in session.plan.waypoints]
    return msg


def dispatch(session: Session, role: Role, raw) -> dict | None:
    """Validate one client message and queue it; returns an immediate
    error reply or None."""
    try:
        msg = parse_message(raw)
        mtype, body = validate_client_message(msg, role)
    except ProtocolError as e:
        return e.to_wire()
    session.submit(role, mtype, body)
    return None


def route(outbound: list[Outbound], role: Role) -> list[dict]:
    out = []
    for ob in outbound:
        if ob.role is None or ob.role is role:
            out.append({"type": ob.type, **ob.body})
    return out


class SessionHost:
    """One live session shared by up to three role-scoped clients."""

    def __init__(self, session: Session, tick_hz: float = TICKS_PER_SECOND):
        self.session = session
        self.tick_hz = tick_hz
        self.clients: dict[Role, object] = {}
        self._stop = asyncio.Event()

    async def handler(self, ws):
        role = None
        registered = False
        try:
            raw = await ws.recv()
            try:
                msg = parse_message(raw)
                if msg.get("type") != "join":
                    raise ProtocolError("join_first",
                                        "first message must be join")
                role = validate_join(msg)
                if role in self.clients:
                    raise ProtocolError("role_taken",
                                        f"{role.value} already connected")
            except ProtocolError as e:
                await ws.send(canonical_json(e.to_wire()))
                return
            self.clients[role] = ws
            registered = True
            await ws.send(canonical_json(
                welcome_message(self.session, role)))
            async for raw in ws:
                err = dispatch(self.session, role, raw)
                if err is not None:
                    await ws.send(canonical_json(err))
        finally:
            # a refused joiner must not evict the client holding the role
            if registered and self.clients.get(role) is ws:
                del self.clients[role]

    async def _send_safe(self, ws, text: str):
        try:
            await ws.send(text)
        except Exception:
            pass

    async def tick_loop(self):
        interval = 1.0 / self.tick_hz
        loop = asyncio.get_running_loop()
        next_at = loop.time()
        while not self._stop.is_set():
            frame = self.session.step()
            sends = []
            outbound = self.session.drain_outbox()
            for role, ws in list(self.clients.items()):
                for msg in route(outbound, role):
                    sends.append(self._send_safe(ws, canonical_json(msg)))
                if frame is not None:
                    sends.append(self._send_safe(
                        ws, canonical_json(state_message(self.session,
                                                         role))))
            if sends:
                await asyncio.gather(*sends)
            next_at += interval
            delay = next_at - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)

    def stop(self):
        self._stop.set()


async def serve(session: Session, host: str = "127.0.0.1", port: int = 8765):
    import websockets
    hub = SessionHost(session)
    async with websockets.serve(hub.handler, host, port):
        await hub.tick_loop()


def run_scripted_session(session: Session, script, duration_ticks: int):
    """Deterministic in-process run through the protocol dispatch path.

    script: iterable of {"tick": int, "role": str, ...client message}.
    Returns the outbound transcript: [(tick, role or None, message)].
    """
    by_tick: dict[int, list[tuple[Role, dict]]] = {}
    for entry in script:
        role = Role(entry["role"])
        msg = {k: v for k, v in entry.items() if k not in ("tick", "role")}
        by_tick.setdefault(int(entry["tick"]), []).append((role, msg))

    transcript: list[tuple[int, str | None, dict]] = []
    while session.tick_count < duration_ticks:
        for role, msg in by_tick.get(session.tick_count, []):
            err = dispatch(session, role, msg)
            if err is not None:
                transcript.append((session.tick_count, role.value, err))
        tick = session.tick_count
        session.step()
        for ob in session.drain_outbox():
            transcript.append(
                (tick, ob.role.value if ob.role else None,
                 {"type": ob.type, **ob.body}))
    return transcript


def load_script(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if isinstance(doc, dict):
        doc = doc["script"]
    return doc
