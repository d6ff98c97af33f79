// Single-threaded view model: socket messages are queued in and every
// rendered datum is derived from them. Nothing is fabricated client
// side and nothing outside the role's protocol view is reachable.

import {
  JunctionGeometry,
  LaneGeometry,
  Message,
  Role,
  StateMessage,
  WelcomeMessage,
} from "./protocol";

export interface ChatEntry {
  speaker: string;
  text: string;
  t: number;
}

export interface LandmarkPin {
  name: string;
  x: number;
  y: number;
}

export interface Toast {
  kind: "prompt" | "error" | "info";
  text: string;
}

export interface Layers {
  lanes: LaneGeometry[];
  junctions: JunctionGeometry[]; // click-targets, co-wizard plan entry
  landmarks: LandmarkPin[]; // located landmarks from the role view only
  blockedLanes: string[];
  obstacles: [string, number, number][];
  trajectory: [number, number][];
  planWaypoints: [number, number][]; // co-wizard overlay, else empty
}

const STALE_AFTER_MS = 1000;
const TRAJECTORY_CAP = 2000;

export class ViewModel {
  role: Role;
  welcome: WelcomeMessage | null = null;
  state: StateMessage | null = null;
  chat: ChatEntry[] = [];
  toasts: Toast[] = [];
  subgoalStatuses: string[] = [];
  // controls disabled while a command awaits the server's answer
  pendingControl: string | null = null;
  private trajectory: [number, number][] = [];
  private lastFrameAtMs = 0;

  constructor(role: Role) {
    this.role = role;
  }

  ingest(msg: Message, nowMs: number = Date.now()): void {
    switch (msg.type) {
      case "welcome":
        this.welcome = msg as WelcomeMessage;
        this.subgoalStatuses = this.viewSubgoals().map(
          (sg) => String(sg.status ?? ""),
        );
        break;
      case "state": {
        const st = msg as StateMessage;
        this.state = st;
        this.lastFrameAtMs = nowMs;
        this.trajectory.push([st.vehicle.x, st.vehicle.y]);
        if (this.trajectory.length > TRAJECTORY_CAP) this.trajectory.shift();
        this.subgoalStatuses = st.subgoals;
        // a fresh authoritative frame acknowledges the pending command
        this.pendingControl = null;
        break;
      }
      case "chat":
        this.chat.push({
          speaker: String(msg.speaker ?? ""),
          text: String(msg.text ?? ""),
          t: Number(msg.t_start ?? 0),
        });
        break;
      case "prompt":
        this.toasts.push({ kind: "prompt", text: String(msg.text ?? "") });
        break;
      case "task_update":
        this.toasts.push({ kind: "info", text: "task updated" });
        break;
      case "error":
        this.pendingControl = null;
        this.toasts.push({
          kind: "error",
          text: `${msg.code}: ${msg.detail ?? ""}`,
        });
        break;
      default:
        break;
    }
  }

  markPending(controlId: string): void {
    this.pendingControl = controlId;
  }

  isControlDisabled(controlId: string): boolean {
    return this.pendingControl === controlId;
  }

  isStale(nowMs: number = Date.now()): boolean {
    if (this.lastFrameAtMs === 0) return true;
    return nowMs - this.lastFrameAtMs > STALE_AFTER_MS;
  }

  private viewSubgoals(): Record<string, any>[] {
    const view = this.welcome?.view as Record<string, unknown> | undefined;
    const sgs = view?.subgoals;
    return Array.isArray(sgs) ? (sgs as Record<string, any>[]) : [];
  }

  // located landmark pins, strictly from the role-scoped welcome view
  private landmarkPins(): LandmarkPin[] {
    const view = this.welcome?.view as Record<string, any> | undefined;
    const pins: LandmarkPin[] = [];
    const seen = new Set<string>();
    if (view && Array.isArray(view.landmarks)) {
      // co-wizard shape: {name, located, position?}
      for (const lm of view.landmarks) {
        if (lm.located && Array.isArray(lm.position)) {
          pins.push({ name: lm.name, x: lm.position[0], y: lm.position[1] });
        }
      }
      return pins;
    }
    for (const sg of this.viewSubgoals()) {
      // participant/ad-wizard shape: subgoals with optional position
      if (Array.isArray(sg.position) && !seen.has(sg.landmark)) {
        seen.add(sg.landmark);
        pins.push({ name: sg.landmark, x: sg.position[0], y: sg.position[1] });
      }
    }
    return pins;
  }

  layers(): Layers {
    const geo = this.welcome?.map_geometry;
    const world = this.state?.world;
    return {
      lanes: geo ? geo.lanes : [],
      junctions: this.role === "co_wizard" && geo ? geo.junctions : [],
      landmarks: this.landmarkPins(),
      blockedLanes: world ? world.blocked.map((b) => b[0]) : [],
      obstacles: world ? world.obstacles : [],
      trajectory: [...this.trajectory],
      planWaypoints: this.state?.plan ? this.state.plan : [],
    };
  }
}
