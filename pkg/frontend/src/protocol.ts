// Wire types and message builders for the session protocol. Every
// control in the panels serializes through one of these builders, so
// the sweep test covers the whole surface.

export type Role = "participant" | "co_wizard" | "ad_wizard";

export interface Message {
  type: string;
  [key: string]: unknown;
}

export interface VehicleFrame {
  x: number;
  y: number;
  yaw: number;
  speed: number;
  lights_on: boolean;
  lane: string;
}

export interface WorldFrame {
  weather: string;
  daylight: string;
  blocked: [string, number, number][];
  obstacles: [string, number, number][];
}

export interface StateMessage extends Message {
  type: "state";
  t: number;
  vehicle: VehicleFrame;
  world: WorldFrame;
  subgoals: string[];
  plan_digest: string;
  plan?: [number, number][]; // co-wizard only
}

export interface LaneGeometry {
  id: string;
  street: string;
  points: [number, number][];
}

export interface JunctionGeometry {
  id: string;
  x: number;
  y: number;
}

export interface MapGeometry {
  town: string;
  lanes: LaneGeometry[];
  junctions: JunctionGeometry[];
}

export interface WelcomeMessage extends Message {
  type: "welcome";
  role: Role;
  view: Record<string, unknown>;
  recommended_speed_kmh: number;
  map_geometry: MapGeometry;
  map?: string;
}

export const join = (role: Role): Message => ({ type: "join", role });

export const command = {
  laneFollow: (): Message => ({ type: "command", cmd: "LaneFollow" }),
  laneSwitch: (angle: number): Message => ({
    type: "command",
    cmd: "LaneSwitch",
    angle,
  }),
  jTurn: (angle: number): Message => ({ type: "command", cmd: "JTurn", angle }),
  uTurn: (): Message => ({ type: "command", cmd: "UTurn" }),
  stop: (): Message => ({ type: "command", cmd: "Stop" }),
  start: (): Message => ({ type: "command", cmd: "Start" }),
  speedChange: (delta: -5 | 5): Message => ({
    type: "command",
    cmd: "SpeedChange",
    speed: delta,
  }),
  lightChange: (on: boolean): Message => ({
    type: "command",
    cmd: "LightChange",
    light: on ? "on" : "off",
  }),
};

export const mental = {
  planUpdate: (junctions: string[]): Message => ({
    type: "mental",
    mental: "PlanUpdate",
    plan: junctions,
  }),
  goalUpdate: (landmarks: string[]): Message => ({
    type: "mental",
    mental: "GoalUpdate",
    goal: landmarks,
  }),
  statusUpdate: (landmark: string, status: string): Message => ({
    type: "mental",
    mental: "StatusUpdate",
    status_pair: [landmark, status],
  }),
  knowledgeUpdate: (x: number, y: number): Message => ({
    type: "mental",
    mental: "KnowledgeUpdate",
    guess: [x, y],
  }),
  other: (): Message => ({ type: "mental", mental: "Other" }),
};

// press-and-talk substitute: the composition window supplies the
// speech-timing fields of the log schema
export const chat = (
  speaker: "HUM" | "BOT",
  text: string,
  tStart: number,
  tEnd: number,
): Message => ({
  type: "chat",
  speaker,
  text,
  t_start: tStart,
  t_end: tEnd,
  spans: [],
  eu_id: "",
  tu_id: "",
});

export const envException = {
  weather: (weather: "clear" | "rain" | "fog"): Message => ({
    type: "env_exception",
    exc: "WeatherChange",
    weather,
  }),
  timeOfDay: (daylight: "day" | "night"): Message => ({
    type: "env_exception",
    exc: "TimeOfDayChange",
    daylight,
  }),
  roadblock: (lane: string, sFrom: number, sTo: number): Message => ({
    type: "env_exception",
    exc: "Roadblock",
    lane,
    s_from: sFrom,
    s_to: sTo,
  }),
  spawnObstacle: (obstacle: string, x: number, y: number): Message => ({
    type: "env_exception",
    exc: "SpawnObstacle",
    obstacle,
    x,
    y,
  }),
};

export const taskException = {
  addSubgoal: (
    landmark: string,
    prompt: string,
    description?: string,
  ): Message => {
    const msg: Message = {
      type: "task_exception",
      exc: "AddSubgoal",
      landmark,
      prompt,
    };
    if (description !== undefined) msg.description = description;
    return msg;
  },
  changeSubgoal: (target: number, landmark: string, prompt: string): Message => ({
    type: "task_exception",
    exc: "ChangeSubgoal",
    target,
    landmark,
    prompt,
  }),
  deleteSubgoal: (target: number, prompt: string): Message => ({
    type: "task_exception",
    exc: "DeleteSubgoal",
    target,
    prompt,
  }),
};
