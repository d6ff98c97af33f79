// Panel definitions: every button/dial/form the console offers, with a
// representative serialization for the exhaustive sweep test. The UI
// builds its DOM from these lists so a control cannot exist without a
// serializer.

import {
  Message,
  Role,
  chat,
  command,
  envException,
  mental,
  taskException,
} from "./protocol";

export interface Control {
  id: string;
  label: string;
  role: Role;
  // representative message as emitted when the control fires
  sample: () => Message;
}

export const coWizardControls: Control[] = [
  { id: "lane_follow", label: "Lane Follow", role: "co_wizard", sample: () => command.laneFollow() },
  { id: "lane_switch_left", label: "Switch Left", role: "co_wizard", sample: () => command.laneSwitch(90) },
  { id: "lane_switch_right", label: "Switch Right", role: "co_wizard", sample: () => command.laneSwitch(-90) },
  { id: "jturn", label: "Junction Turn", role: "co_wizard", sample: () => command.jTurn(90) },
  { id: "uturn", label: "U-Turn", role: "co_wizard", sample: () => command.uTurn() },
  { id: "stop", label: "Stop", role: "co_wizard", sample: () => command.stop() },
  { id: "start", label: "Start", role: "co_wizard", sample: () => command.start() },
  { id: "speed_up", label: "Speed +5", role: "co_wizard", sample: () => command.speedChange(5) },
  { id: "speed_down", label: "Speed -5", role: "co_wizard", sample: () => command.speedChange(-5) },
  { id: "lights_on", label: "Lights On", role: "co_wizard", sample: () => command.lightChange(true) },
  { id: "lights_off", label: "Lights Off", role: "co_wizard", sample: () => command.lightChange(false) },
  // mental-action strip; PlanUpdate is fed by junction clicks on the map
  { id: "plan_update", label: "Plan", role: "co_wizard", sample: () => mental.planUpdate(["j_0_0", "j_0_1"]) },
  { id: "goal_update", label: "Goal", role: "co_wizard", sample: () => mental.goalUpdate(["KFC"]) },
  { id: "status_update", label: "Status", role: "co_wizard", sample: () => mental.statusUpdate("KFC", "Complete") },
  { id: "knowledge_update", label: "Guess", role: "co_wizard", sample: () => mental.knowledgeUpdate(12.5, -40.0) },
  { id: "mental_other", label: "Other", role: "co_wizard", sample: () => mental.other() },
  { id: "chat", label: "Talk", role: "co_wizard", sample: () => chat("BOT", "turning left ahead", 3.2, 5.0) },
];

export const adWizardControls: Control[] = [
  { id: "weather_clear", label: "Clear", role: "ad_wizard", sample: () => envException.weather("clear") },
  { id: "weather_rain", label: "Rain", role: "ad_wizard", sample: () => envException.weather("rain") },
  { id: "weather_fog", label: "Fog", role: "ad_wizard", sample: () => envException.weather("fog") },
  { id: "time_day", label: "Day", role: "ad_wizard", sample: () => envException.timeOfDay("day") },
  { id: "time_night", label: "Night", role: "ad_wizard", sample: () => envException.timeOfDay("night") },
  { id: "roadblock", label: "Roadblock", role: "ad_wizard", sample: () => envException.roadblock("r_h0_E_F0", 5, 25) },
  { id: "spawn_obstacle", label: "Obstacle", role: "ad_wizard", sample: () => envException.spawnObstacle("Vehicles", 30, -12) },
  { id: "task_add", label: "Add Subgoal", role: "ad_wizard", sample: () => taskException.addSubgoal("Shell", "One more stop, please.", "Fill up at Shell") },
  { id: "task_change", label: "Change Subgoal", role: "ad_wizard", sample: () => taskException.changeSubgoal(0, "Coco", "Change of plan.") },
  { id: "task_delete", label: "Delete Subgoal", role: "ad_wizard", sample: () => taskException.deleteSubgoal(1, "Skip the second stop.") },
];

export const participantControls: Control[] = [
  { id: "chat", label: "Talk", role: "participant", sample: () => chat("HUM", "take the next left", 1.0, 2.4) },
];

export function controlsFor(role: Role): Control[] {
  if (role === "co_wizard") return coWizardControls;
  if (role === "ad_wizard") return adWizardControls;
  return participantControls;
}
