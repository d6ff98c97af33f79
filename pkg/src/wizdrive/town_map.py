"""Lane-level road graph: roads, lanes, junctions, streets and landmarks.

Maps are immutable after loading and safe to share between threads.
Coordinates are meters on a flat 2D plane, y-up; yaw is degrees
counter-clockwise from +x, normalized to [-180, 180).
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

from .vehicle import normalize_yaw

MAP_FORMAT_VERSION = 1

# Landmark name vocabulary (Queried/Unknown excluded: those are dialogue
# values, not physical places).
LANDMARK_NAMES = (
    "BurgerKing", "Coco", "Ikea", "KFC", "Panera",
    "Qdoba", "SevenEleven", "Shell", "House", "Person",
)

LANDMARK_CATEGORIES = ("store", "restaurant", "residential", "gas", "person")

STREET_NAMES = (
    "Baits", "Beal", "Bishop", "Bonisteel", "Broadway", "Division",
    "Draper", "Duffield", "Fuller", "Hayward", "Hubbard", "Murfin",
    "Plymouth", "Upland", "Highway",
)


class MapError(ValueError):
    """Malformed or inconsistent map document."""


class NoRouteError(Exception):
    """Destination unreachable given the blocked lane set."""


class InvalidEndpointError(ValueError):
    """Route endpoint does not lie on a drivable lane of this map."""


@dataclass(frozen=True)
class Waypoint:
    position: tuple[float, float]
    yaw: float
    lane_id: str
    s: float


@dataclass(frozen=True)
class Landmark:
    name: str
    category: str
    position: tuple[float, float]
    anchor_lane: str


@dataclass(frozen=True)
class Connector:
    in_lane: str
    out_lane: str
    turn_yaw_delta: float


@dataclass(frozen=True)
class Junction:
    junction_id: str
    connectors: tuple[Connector, ...]


@dataclass(frozen=True)
class Lane:
    lane_id: str
    road_id: str
    direction: str
    waypoints: tuple[Waypoint, ...]

    @property
    def length(self) -> float:
        return self.waypoints[-1].s

    def waypoint_at(self, s: float) -> Waypoint:
        """Interpolated pose at arc-length s (clamped to the lane)."""
        wps = self.waypoints
        if s <= wps[0].s:
            return wps[0]
        if s >= wps[-1].s:
            return wps[-1]
        for i in range(1, len(wps)):
            if wps[i].s >= s:
                a, b = wps[i - 1], wps[i]
                f = (s - a.s) / (b.s - a.s)
                x = a.position[0] + f * (b.position[0] - a.position[0])
                y = a.position[1] + f * (b.position[1] - a.position[1])
                dyaw = normalize_yaw(b.yaw - a.yaw)
                return Waypoint((x, y), normalize_yaw(a.yaw + f * dyaw),
                                self.lane_id, s)
        return wps[-1]


@dataclass(frozen=True)
class Road:
    road_id: str
    street: str
    lanes: tuple[Lane, ...]


@dataclass(frozen=True)
class JunctionPath:
    junction_ids: tuple[str, ...]
    total_length: float


@dataclass(frozen=True)
class TownMap:
    town_id: str
    roads: tuple[Road, ...]
    junctions: tuple[Junction, ...]
    streets: dict[str, frozenset[str]]
    landmarks: tuple[Landmark, ...]
    _lanes: dict[str, Lane] = field(repr=False, default_factory=dict)
    # lane_id -> list of (junction_id, connector) leaving that lane's end
    _exits: dict[str, list[tuple[str, Connector]]] = field(
        repr=False, default_factory=dict)

    def lane(self, lane_id: str) -> Lane:
        return self._lanes[lane_id]

    def has_lane(self, lane_id: str) -> bool:
        return lane_id in self._lanes

    @property
    def lanes(self) -> list[Lane]:
        return [self._lanes[k] for k in sorted(self._lanes)]

    def exits(self, lane_id: str) -> list[tuple[str, Connector]]:
        return self._exits.get(lane_id, [])

    def landmark(self, name: str) -> Landmark:
        for lm in self.landmarks:
            if lm.name == name:
                return lm
        raise KeyError(f"no landmark named {name!r}")

    def neighbor_lane(self, lane_id: str, side: int) -> Lane | None:
        """Same-direction neighbor lane on the given side (+1 left, -1 right).

        Neighbors live on the same road with the same direction tag; side is
        judged from the lateral offset at the lane start.
        """
        me = self._lanes[lane_id]
        road = next(r for r in self.roads if r.road_id == me.road_id)
        w0 = me.waypoints[0]
        yaw = math.radians(w0.yaw)
        # unit left-normal of the lane heading
        nx, ny = -math.sin(yaw), math.cos(yaw)
        best = None
        best_off = None
        for lane in road.lanes:
            if lane.lane_id == lane_id or lane.direction != me.direction:
                continue
            dx = lane.waypoints[0].position[0] - w0.position[0]
            dy = lane.waypoints[0].position[1] - w0.position[1]
            off = dx * nx + dy * ny
            if off * side <= 0:
                continue
            if best_off is None or abs(off) < abs(best_off):
                best, best_off = lane, off
        return best

    def opposite_lane(self, lane_id: str) -> Lane | None:
        """Closest lane on the same road running the other way."""
        me = self._lanes[lane_id]
        road = next(r for r in self.roads if r.road_id == me.road_id)
        w0 = me.waypoints[0]
        best = None
        best_d = None
        for lane in road.lanes:
            if lane.direction == me.direction:
                continue
            d = min(math.dist(w0.position, wp.position)
                    for wp in lane.waypoints)
            if best_d is None or d < best_d:
                best, best_d = lane, d
        return best


def _build_lane(road_id: str, spec: dict) -> Lane:
    lane_id = spec["id"]
    pts = spec["waypoints"]
    if len(pts) < 2:
        raise MapError(f"lane {lane_id!r} needs at least 2 waypoints")
    wps = []
    s = 0.0
    prev = None
    for x, y, yaw in pts:
        if prev is not None:
            step = math.dist(prev, (x, y))
            if step <= 0:
                raise MapError(
                    f"lane {lane_id!r} waypoints must strictly advance")
            s += step
        wps.append(Waypoint((float(x), float(y)), normalize_yaw(float(yaw)),
                            lane_id, s))
        prev = (x, y)
    return Lane(lane_id, road_id, spec["direction"], tuple(wps))


def load_map(source) -> TownMap:
    """Load a map document (dict, JSON text, or path-like) into a TownMap."""
    if isinstance(source, dict):
        doc = source
    elif isinstance(source, (str, bytes)) and not str(source).lstrip().startswith("{"):
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = json.loads(source)

    if doc.get("format") != MAP_FORMAT_VERSION:
        raise MapError(f"unsupported map format {doc.get('format')!r}")

    roads = []
    lanes: dict[str, Lane] = {}
    streets: dict[str, set[str]] = {}
    road_street: dict[str, str] = {}
    for rspec in doc["roads"]:
        rid = rspec["id"]
        if rid in road_street:
            raise MapError(f"duplicate road id {rid!r}")
        rlanes = tuple(_build_lane(rid, ls) for ls in rspec["lanes"])
        for lane in rlanes:
            if lane.lane_id in lanes:
                raise MapError(f"duplicate lane id {lane.lane_id!r}")
            lanes[lane.lane_id] = lane
        roads.append(Road(rid, rspec["street"], rlanes))
        road_street[rid] = rspec["street"]
        streets.setdefault(rspec["street"], set()).add(rid)

    junctions = []
    exits: dict[str, list[tuple[str, Connector]]] = {}
    for jspec in doc["junctions"]:
        jid = jspec["id"]
        conns = []
        for cspec in jspec["connectors"]:
            for key in ("in_lane", "out_lane"):
                if cspec[key] not in lanes:
                    raise MapError(
                        f"junction {jid!r} connector references missing lane "
                        f"{cspec[key]!r}")
            conn = Connector(cspec["in_lane"], cspec["out_lane"],
                             normalize_yaw(float(cspec["turn_yaw_delta"])))
            conns.append(conn)
            exits.setdefault(conn.in_lane, []).append((jid, conn))
        junctions.append(Junction(jid, tuple(conns)))

    landmarks = []
    seen_names = set()
    for lspec in doc.get("landmarks", []):
        name = lspec["name"]
        if name in seen_names:
            raise MapError(f"duplicate landmark name {name!r}")
        seen_names.add(name)
        if lspec["anchor_lane"] not in lanes:
            raise MapError(
                f"landmark {name!r} references missing lane "
                f"{lspec['anchor_lane']!r}")
        landmarks.append(Landmark(name, lspec["category"],
                                  (float(lspec["x"]), float(lspec["y"])),
                                  lspec["anchor_lane"]))

    for v in exits.values():
        v.sort(key=lambda jc: (jc[0], jc[1].out_lane))

    return TownMap(doc["town_id"], tuple(roads), tuple(junctions),
                   {k: frozenset(v) for k, v in streets.items()},
                   tuple(landmarks), lanes, exits)


def serialize_map(m: TownMap) -> str:
    """Canonical JSON for a TownMap; load_map(serialize_map(m)) == m."""
    doc = {
        "format": MAP_FORMAT_VERSION,
        "town_id": m.town_id,
        "roads": [
            {
                "id": r.road_id,
                "street": r.street,
                "lanes": [
                    {
                        "id": lane.lane_id,
                        "direction": lane.direction,
                        "waypoints": [[wp.position[0], wp.position[1], wp.yaw]
                                      for wp in lane.waypoints],
                    }
                    for lane in r.lanes
                ],
            }
            for r in m.roads
        ],
        "junctions": [
            {
                "id": j.junction_id,
                "connectors": [
                    {"in_lane": c.in_lane, "out_lane": c.out_lane,
                     "turn_yaw_delta": c.turn_yaw_delta}
                    for c in j.connectors
                ],
            }
            for j in m.junctions
        ],
        "landmarks": [
            {"name": lm.name, "category": lm.category,
             "x": lm.position[0], "y": lm.position[1],
             "anchor_lane": lm.anchor_lane}
            for lm in m.landmarks
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def junction_adjacency(m: TownMap) -> dict[str, set[str]]:
    """Junction pairs joined by a single lane (for plan connectivity)."""
    starts: dict[str, str] = {}   # lane -> junction it leaves
    ends: dict[str, str] = {}     # lane -> junction it enters
    for j in m.junctions:
        for c in j.connectors:
            starts[c.out_lane] = j.junction_id
            ends[c.in_lane] = j.junction_id
    adj: dict[str, set[str]] = {j.junction_id: set() for j in m.junctions}
    for lane_id, j_from in starts.items():
        j_to = ends.get(lane_id)
        if j_to is not None and j_to != j_from:
            adj[j_from].add(j_to)
            adj[j_to].add(j_from)
    return adj


def nearest_waypoint(m: TownMap, p: tuple[float, float]) -> Waypoint:
    """Waypoint closest to p; ties break on (lane_id, s)."""
    best = None
    best_key = None
    for lane_id in sorted(m._lanes):
        for wp in m._lanes[lane_id].waypoints:
            key = (math.dist(p, wp.position), wp.lane_id, wp.s)
            if best_key is None or key < best_key:
                best, best_key = wp, key
    assert best is not None, "map has no lanes"
    return best


def landmark_anchor(m: TownMap, lm: Landmark) -> Waypoint:
    """Waypoint on the landmark's anchor lane closest to the landmark."""
    if lm not in m.landmarks:
        raise KeyError(f"landmark {lm.name!r} not in map {m.town_id!r}")
    lane = m.lane(lm.anchor_lane)
    return min(lane.waypoints,
               key=lambda wp: (math.dist(lm.position, wp.position), wp.s))


def junction_route(m: TownMap, src: Waypoint, dst: Waypoint,
                   blocked: frozenset[str] | set[str] = frozenset(),
                   ) -> JunctionPath:
    """Shortest drivable path from src to dst avoiding blocked lanes.

    Cost is geometric lane length. Returns the ordered junction ids the
    vehicle crosses; empty when dst lies ahead on src's own lane.
    """
    if not m.has_lane(src.lane_id) or not m.has_lane(dst.lane_id):
        raise InvalidEndpointError("endpoint lane not in map")
    blocked = frozenset(blocked)
    if src.lane_id in blocked or dst.lane_id in blocked:
        raise NoRouteError("endpoint lane is blocked")

    if src.lane_id == dst.lane_id and dst.s >= src.s:
        return JunctionPath((), dst.s - src.s)

    # Dijkstra over the lane graph. Node = lane id, entered at its start;
    # the source is special-cased (entered mid-lane at src.s).
    dist: dict[str, float] = {}
    prev: dict[str, tuple[str, str]] = {}  # lane -> (prev lane, junction)
    start_cost = m.lane(src.lane_id).length - src.s
    heap: list[tuple[float, str, str, str]] = []
    for jid, conn in m.exits(src.lane_id):
        if conn.out_lane in blocked:
            continue
        heapq.heappush(heap, (start_cost, conn.out_lane, src.lane_id, jid))
    while heap:
        d, lane_id, from_lane, jid = heapq.heappop(heap)
        if lane_id in dist:
            continue
        dist[lane_id] = d
        prev[lane_id] = (from_lane, jid)
        if lane_id == dst.lane_id:
            break
        d2 = d + m.lane(lane_id).length
        for njid, conn in m.exits(lane_id):
            if conn.out_lane in blocked or conn.out_lane in dist:
                continue
            heapq.heappush(heap, (d2, conn.out_lane, lane_id, njid))

    if dst.lane_id not in dist:
        raise NoRouteError(
            f"no route from {src.lane_id} to {dst.lane_id} "
            f"with {len(blocked)} blocked lanes")

    hops = []
    lane_id = dst.lane_id
    while lane_id != src.lane_id:
        from_lane, jid = prev[lane_id]
        hops.append(jid)
        lane_id = from_lane
    hops.reverse()
    return JunctionPath(tuple(hops), dist[dst.lane_id] + dst.s)
