"""Deterministic fixture-town generator.

Towns are rectangular junction grids with right-hand traffic, one lane
per direction (two on the highway column), 1 m waypoint spacing, and a
landmark set drawn from the fixed name vocabulary. The four shipped
towns are produced by :func:`fixture_town_docs`.
"""

from __future__ import annotations

import math

from .town_map import MAP_FORMAT_VERSION, STREET_NAMES

GRID_SPACING_M = 80.0
JUNCTION_RADIUS_M = 6.0
LANE_OFFSET_M = 1.75
WAYPOINT_SPACING_M = 1.0

# name -> category, fixed across all towns
LANDMARK_CATALOG = {
    "BurgerKing": "restaurant",
    "Coco": "restaurant",
    "KFC": "restaurant",
    "Panera": "restaurant",
    "Qdoba": "restaurant",
    "Ikea": "store",
    "SevenEleven": "store",
    "Shell": "gas",
    "House": "residential",
    "Person": "person",
}


def _lane_points(p0, p1, offset):
    """Straight lane from p0 to p1, shifted right by `offset` meters."""
    dx, dy = p1[0] - p0[0], p1[1] - p0[1]
    length = math.hypot(dx, dy)
    ux, uy = dx / length, dy / length
    rx, ry = uy, -ux          # right-hand side of travel
    yaw = math.degrees(math.atan2(uy, ux))
    n = int(round(length / WAYPOINT_SPACING_M))
    pts = []
    for k in range(n + 1):
        t = k / n
        x = p0[0] + t * dx + rx * offset
        y = p0[1] + t * dy + ry * offset
        pts.append([round(x, 6), round(y, 6), round(yaw, 6)])
    return pts


def build_town(town_id: str, rows: int, cols: int,
               removed_edges: set[tuple[str, str]] = frozenset(),
               highway_col: int | None = None,
               landmark_lanes: dict[str, str] | None = None) -> dict:
    """Assemble a map document for a rows x cols junction grid."""
    def jid(r, c):
        return f"J{r}{c}"

    def center(r, c):
        return (c * GRID_SPACING_M, r * GRID_SPACING_M)

    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((jid(r, c), jid(r, c + 1)))
            if r + 1 < rows:
                edges.append((jid(r, c), jid(r + 1, c)))
    edges = [e for e in edges if e not in removed_edges
             and (e[1], e[0]) not in removed_edges]

    pos = {jid(r, c): center(r, c) for r in range(rows) for c in range(cols)}

    # street per grid line, cycled from the shared vocabulary
    col_streets = {c: STREET_NAMES[c % len(STREET_NAMES)]
                   for c in range(cols)}
    row_streets = {r: STREET_NAMES[(cols + r) % len(STREET_NAMES)]
                   for r in range(rows)}
    if highway_col is not None:
        col_streets[highway_col] = "Highway"

    roads = []
    lane_ends: dict[str, list[str]] = {}    # junction -> in-lane ids
    lane_starts: dict[str, list[str]] = {}  # junction -> out-lane ids
    lane_yaw: dict[str, float] = {}

    for a, b in edges:
        pa, pb = pos[a], pos[b]
        vertical = abs(pa[0] - pb[0]) < 1e-9
        if vertical:
            col = int(round(pa[0] / GRID_SPACING_M))
            street = col_streets[col]
            n_lanes = 2 if col == highway_col else 1
        else:
            row = int(round(pa[1] / GRID_SPACING_M))
            street = row_streets[row]
            n_lanes = 1
        rid = f"R_{a}_{b}"
        dx, dy = pb[0] - pa[0], pb[1] - pa[1]
        length = math.hypot(dx, dy)
        ux, uy = dx / length, dy / length
        a_edge = (pa[0] + ux * JUNCTION_RADIUS_M,
                  pa[1] + uy * JUNCTION_RADIUS_M)
        b_edge = (pb[0] - ux * JUNCTION_RADIUS_M,
                  pb[1] - uy * JUNCTION_RADIUS_M)
        lanes = []
        for i in range(n_lanes):
            off = LANE_OFFSET_M * (1 + 2 * i)
            fid, bid = f"{rid}_F{i}", f"{rid}_B{i}"
            lanes.append({"id": fid, "direction": "forward",
                          "waypoints": _lane_points(a_edge, b_edge, off)})
            lanes.append({"id": bid, "direction": "backward",
                          "waypoints": _lane_points(b_edge, a_edge, off)})
            lane_starts.setdefault(a, []).append(fid)
            lane_ends.setdefault(b, []).append(fid)
            lane_starts.setdefault(b, []).append(bid)
            lane_ends.setdefault(a, []).append(bid)
            lane_yaw[fid] = math.degrees(math.atan2(uy, ux))
            lane_yaw[bid] = math.degrees(math.atan2(-uy, -ux))
        roads.append({"id": rid, "street": street, "lanes": lanes})

    junctions = []
    for j in sorted(pos):
        conns = []
        for in_lane in sorted(lane_ends.get(j, [])):
            for out_lane in sorted(lane_starts.get(j, [])):
                delta = (lane_yaw[out_lane] - lane_yaw[in_lane] + 180.0) \
                    % 360.0 - 180.0
                if abs(delta) >= 135.0:   # reversing handled by UTurn
                    continue
                conns.append({"in_lane": in_lane, "out_lane": out_lane,
                              "turn_yaw_delta": round(delta, 6)})
        if conns:
            junctions.append({"id": j, "connectors": conns})

    landmarks = []
    if landmark_lanes:
        lane_pts = {ls["id"]: ls["waypoints"]
                    for r in roads for ls in r["lanes"]}
        for name, lane_id in landmark_lanes.items():
            pts = lane_pts[lane_id]
            mid = pts[len(pts) // 2]
            yaw = math.radians(mid[2])
            # set back 5 m on the curb side of the lane
            x = mid[0] + 5.0 * math.sin(yaw)
            y = mid[1] - 5.0 * math.cos(yaw)
            landmarks.append({"name": name,
                              "category": LANDMARK_CATALOG[name],
                              "x": round(x, 6), "y": round(y, 6),
                              "anchor_lane": lane_id})

    return {"format": MAP_FORMAT_VERSION, "town_id": town_id,
            "roads": roads, "junctions": junctions, "landmarks": landmarks}


def _spread_landmarks(doc_roads, names):
    """Pick one forward lane per landmark, spread over the road list."""
    lanes = [ls["id"] for r in doc_roads for ls in r["lanes"]
             if ls["direction"] == "forward"]
    step = max(1, len(lanes) // len(names))
    return {name: lanes[(i * step) % len(lanes)]
            for i, name in enumerate(names)}


def fixture_town_docs() -> dict[str, dict]:
    """The four shipped towns, keyed by town id."""
    docs = {}
    specs = {
        "town1": dict(rows=3, cols=4, highway_col=1),
        "town2": dict(rows=2, cols=2),
        "town3": dict(rows=3, cols=3,
                      removed_edges={("J11", "J12")}),
        "town5": dict(rows=4, cols=4, highway_col=2,
                      removed_edges={("J11", "J12"), ("J21", "J22")}),
    }
    names = list(LANDMARK_CATALOG)
    for tid, kw in specs.items():
        doc = build_town(tid, **kw)
        doc = build_town(tid, **kw,
                         landmark_lanes=_spread_landmarks(doc["roads"],
                                                          names))
        docs[tid] = doc
    return docs
