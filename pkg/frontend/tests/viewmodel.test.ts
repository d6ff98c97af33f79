// Snapshot-style checks against streams recorded from a real session:
// the view model renders only what the protocol delivered for the role.

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { Message, Role } from "../src/protocol";
import { renderAerial } from "../src/render";
import { ViewModel } from "../src/viewmodel";

const FIXTURES = join(__dirname, "fixtures");

function loadStream(role: Role): Message[] {
  const text = readFileSync(join(FIXTURES, `${role}_stream.jsonl`), "utf-8");
  return text
    .trim()
    .split("\n")
    .map((l) => JSON.parse(l));
}

const meta = JSON.parse(readFileSync(join(FIXTURES, "meta.json"), "utf-8"));

function replay(role: Role): ViewModel {
  const vm = new ViewModel(role);
  let t = 0;
  for (const msg of loadStream(role)) vm.ingest(msg, (t += 10));
  return vm;
}

describe("participant view", () => {
  it("contains no hidden-landmark coordinates in its data layer", () => {
    const vm = replay("participant");
    const layers = vm.layers();
    expect(layers.lanes.length).toBeGreaterThan(0);
    const hidden = meta.hidden_landmarks as {
      name: string;
      position: [number, number];
    }[];
    expect(hidden.length).toBeGreaterThan(0);
    const names = layers.landmarks.map((l) => l.name);
    for (const h of hidden) {
      expect(names).not.toContain(h.name);
      for (const pin of layers.landmarks) {
        expect([pin.x, pin.y]).not.toEqual(h.position);
      }
      // nowhere in the whole received stream either
      const raw = JSON.stringify(loadStream("participant"));
      expect(raw).not.toContain(JSON.stringify(h.position));
    }
    // non-hidden subgoal landmarks are still pinned
    expect(layers.landmarks.length).toBeGreaterThan(0);
  });

  it("never renders a plan overlay", () => {
    const vm = replay("participant");
    expect(vm.layers().planWaypoints).toEqual([]);
    expect(vm.layers().junctions).toEqual([]);
    const colors = renderAerial(vm, 1e12).map((op) =>
      "color" in op ? op.color : "",
    );
    expect(colors).not.toContain("#27ae60");
  });

  it("receives chat, prompt and task updates", () => {
    const vm = replay("participant");
    expect(vm.chat.some((c) => c.text.includes("first stop"))).toBe(true);
    expect(
      vm.toasts.some(
        (t) => t.kind === "prompt" && t.text.includes("Skip the second"),
      ),
    ).toBe(true);
    expect(vm.subgoalStatuses).toContain("Abandoned");
  });
});

describe("co-wizard view", () => {
  it("overlays plan waypoints and junction targets", () => {
    const vm = replay("co_wizard");
    const layers = vm.layers();
    expect(layers.planWaypoints.length).toBeGreaterThan(1);
    expect(layers.junctions.length).toBeGreaterThan(0);
    const ops = renderAerial(vm, 1e12);
    expect(ops.some((op) => "color" in op && op.color === "#27ae60")).toBe(
      true,
    );
  });

  it("shows hidden landmarks as unlocated only", () => {
    const vm = replay("co_wizard");
    const view = vm.welcome?.view as Record<string, any>;
    const hiddenNames = meta.hidden_landmarks.map((h: any) => h.name);
    for (const lm of view.landmarks) {
      if (hiddenNames.includes(lm.name)) {
        expect(lm.located).toBe(false);
        expect(lm.position).toBeUndefined();
      }
    }
    const pinned = vm.layers().landmarks.map((l) => l.name);
    for (const name of hiddenNames) expect(pinned).not.toContain(name);
  });
});

describe("view model mechanics", () => {
  it("flags staleness after a 1 s frame gap", () => {
    const vm = new ViewModel("participant");
    expect(vm.isStale(0)).toBe(true);
    const [welcome, ...rest] = loadStream("participant");
    vm.ingest(welcome, 0);
    const firstState = rest.find((m) => m.type === "state")!;
    vm.ingest(firstState, 1000);
    expect(vm.isStale(1500)).toBe(false);
    expect(vm.isStale(2100)).toBe(true);
    const badge = renderAerial(vm, 2100).find((op) => op.op === "badge");
    expect(badge).toMatchObject({ text: "STALE" });
  });

  it("disables a fired control until the next authoritative answer", () => {
    const vm = new ViewModel("co_wizard");
    vm.markPending("jturn");
    expect(vm.isControlDisabled("jturn")).toBe(true);
    vm.ingest({ type: "error", code: "no_junction_in_horizon", detail: "x" });
    expect(vm.isControlDisabled("jturn")).toBe(false);
    expect(vm.toasts.at(-1)?.text).toContain("no_junction_in_horizon");
    vm.markPending("stop");
    const state = loadStream("co_wizard").find((m) => m.type === "state")!;
    vm.ingest(state, 50);
    expect(vm.isControlDisabled("stop")).toBe(false);
  });

  it("builds trajectory history only from received frames", () => {
    const vm = replay("co_wizard");
    const states = loadStream("co_wizard").filter((m) => m.type === "state");
    expect(vm.layers().trajectory.length).toBe(states.length);
  });
});
