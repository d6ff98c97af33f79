// Scene construction for the two views. Render functions emit plain
// draw-op lists so they are testable without a DOM; canvas.ts turns
// them into 2D-context calls.

import { ViewModel } from "./viewmodel";

export type DrawOp =
  | { op: "polyline"; points: [number, number][]; color: string; width: number }
  | { op: "circle"; x: number; y: number; r: number; color: string; label?: string }
  | { op: "vehicle"; x: number; y: number; yaw: number }
  | { op: "tint"; color: string }
  | { op: "badge"; text: string };

const LANE_COLOR = "#888";
const BLOCKED_COLOR = "#c0392b";
const TRAJECTORY_COLOR = "#2980b9";
const PLAN_COLOR = "#27ae60";
const JUNCTION_COLOR = "#e67e22";
const LANDMARK_COLOR = "#8e44ad";

const WEATHER_TINT: Record<string, string> = {
  rain: "rgba(70,90,120,0.25)",
  fog: "rgba(200,200,200,0.45)",
};

export function renderAerial(vm: ViewModel, nowMs: number): DrawOp[] {
  const layers = vm.layers();
  const ops: DrawOp[] = [];
  for (const lane of layers.lanes) {
    const blocked = layers.blockedLanes.includes(lane.id);
    ops.push({
      op: "polyline",
      points: lane.points,
      color: blocked ? BLOCKED_COLOR : LANE_COLOR,
      width: blocked ? 3 : 1,
    });
  }
  for (const lm of layers.landmarks) {
    ops.push({ op: "circle", x: lm.x, y: lm.y, r: 4, color: LANDMARK_COLOR, label: lm.name });
  }
  for (const [name, x, y] of layers.obstacles) {
    ops.push({ op: "circle", x, y, r: 3, color: BLOCKED_COLOR, label: name });
  }
  if (layers.trajectory.length > 1) {
    ops.push({ op: "polyline", points: layers.trajectory, color: TRAJECTORY_COLOR, width: 1 });
  }
  // co-wizard-only layers: plan overlay and junction click-targets
  if (layers.planWaypoints.length > 1) {
    ops.push({ op: "polyline", points: layers.planWaypoints, color: PLAN_COLOR, width: 2 });
  }
  for (const j of layers.junctions) {
    ops.push({ op: "circle", x: j.x, y: j.y, r: 6, color: JUNCTION_COLOR, label: j.id });
  }
  const v = vm.state?.vehicle;
  if (v) ops.push({ op: "vehicle", x: v.x, y: v.y, yaw: v.yaw });
  if (vm.isStale(nowMs)) ops.push({ op: "badge", text: "STALE" });
  return ops;
}

// top-down chase substitute for the camera view: vehicle-local scene
// plus a weather/daylight tint
export function renderChase(vm: ViewModel, nowMs: number, radius = 40): DrawOp[] {
  const layers = vm.layers();
  const v = vm.state?.vehicle;
  const ops: DrawOp[] = [];
  if (!v) {
    ops.push({ op: "badge", text: "NO SIGNAL" });
    return ops;
  }
  const near = (p: [number, number]) =>
    Math.hypot(p[0] - v.x, p[1] - v.y) <= radius;
  for (const lane of layers.lanes) {
    if (!lane.points.some(near)) continue;
    const blocked = layers.blockedLanes.includes(lane.id);
    ops.push({
      op: "polyline",
      points: lane.points,
      color: blocked ? BLOCKED_COLOR : LANE_COLOR,
      width: 2,
    });
  }
  for (const [name, x, y] of layers.obstacles) {
    if (near([x, y])) ops.push({ op: "circle", x, y, r: 3, color: BLOCKED_COLOR, label: name });
  }
  ops.push({ op: "vehicle", x: v.x, y: v.y, yaw: v.yaw });
  const world = vm.state?.world;
  if (world) {
    const tint = WEATHER_TINT[world.weather];
    if (tint) ops.push({ op: "tint", color: tint });
    if (world.daylight === "night") ops.push({ op: "tint", color: "rgba(10,10,40,0.4)" });
    ops.push({ op: "badge", text: `${world.weather} / ${world.daylight}` });
  }
  if (vm.isStale(nowMs)) ops.push({ op: "badge", text: "STALE" });
  return ops;
}
