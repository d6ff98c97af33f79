"""Ad-Wizard toolbox: environmental and task exceptions.

World condition is an event-sourced fold over environmental exceptions;
task exceptions rewrite the scenario's subgoal list and produce the
participant prompt.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

from .scenario import (MAX_SUBGOALS, ScenarioState, Subgoal, SubgoalStatus)
from .town_map import Landmark, TownMap

ROADBLOCK_STOP_MARGIN_M = 5.0

# Obstacle names share the Object slot vocabulary (minus the two
# dialogue-only values Queried/Unlabeled).
OBSTACLE_NAMES = (
    "Building", "Fence", "Pedestrian", "Pole", "RoadLine", "Road",
    "SideWalk", "Vegetation", "Vehicles", "Wall", "TrafficSign", "Sky",
    "Ground", "Bridge", "RailTrack", "GuardRail", "TrafficLight",
    "Static", "Dynamic", "Water", "Terrain", "Other",
)


class Weather(str, Enum):
    CLEAR = "clear"
    RAIN = "rain"
    FOG = "fog"


class Daylight(str, Enum):
    DAY = "day"
    NIGHT = "night"


class EnvKind(str, Enum):
    WEATHER_CHANGE = "WeatherChange"
    TIME_OF_DAY_CHANGE = "TimeOfDayChange"
    ROADBLOCK = "Roadblock"
    SPAWN_OBSTACLE = "SpawnObstacle"


class TaskKind(str, Enum):
    ADD_SUBGOAL = "AddSubgoal"
    CHANGE_SUBGOAL = "ChangeSubgoal"
    DELETE_SUBGOAL = "DeleteSubgoal"


class ExceptionError(ValueError):
    """Rejected Ad-Wizard command."""


@dataclass(frozen=True)
class EnvException:
    kind: EnvKind
    weather: Weather | None = None
    daylight: Daylight | None = None
    blocked_lane: str | None = None
    s_from: float | None = None
    s_to: float | None = None
    obstacle: str | None = None
    position: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind is EnvKind.WEATHER_CHANGE and self.weather is None:
            raise ExceptionError("WeatherChange needs a weather value")
        if self.kind is EnvKind.TIME_OF_DAY_CHANGE and self.daylight is None:
            raise ExceptionError("TimeOfDayChange needs a daylight value")
        if self.kind is EnvKind.ROADBLOCK:
            if self.blocked_lane is None or self.s_from is None \
                    or self.s_to is None or self.s_from >= self.s_to:
                raise ExceptionError("Roadblock needs lane and s interval")
        if self.kind is EnvKind.SPAWN_OBSTACLE:
            if self.obstacle not in OBSTACLE_NAMES or self.position is None:
                raise ExceptionError(
                    "SpawnObstacle needs an Object-vocabulary name and "
                    "a position")

    def to_wire(self) -> dict:
        msg = {"exc": self.kind.value}
        if self.weather:
            msg["weather"] = self.weather.value
        if self.daylight:
            msg["daylight"] = self.daylight.value
        if self.blocked_lane:
            msg.update(lane=self.blocked_lane,
                       s_from=self.s_from, s_to=self.s_to)
        if self.obstacle:
            msg.update(obstacle=self.obstacle,
                       x=self.position[0], y=self.position[1])
        return msg

    @classmethod
    def from_wire(cls, msg: dict) -> "EnvException":
        w = msg.get("weather")
        d = msg.get("daylight")
        pos = (msg["x"], msg["y"]) if "x" in msg else None
        return cls(EnvKind(msg["exc"]),
                   weather=Weather(w) if w else None,
                   daylight=Daylight(d) if d else None,
                   blocked_lane=msg.get("lane"),
                   s_from=msg.get("s_from"), s_to=msg.get("s_to"),
                   obstacle=msg.get("obstacle"), position=pos)


@dataclass(frozen=True)
class TaskException:
    kind: TaskKind
    prompt: str
    target: int | None = None           # Change / Delete
    new_landmark: str | None = None     # Add / Change (landmark name)
    description: str | None = None      # Add

    def __post_init__(self):
        if not self.prompt:
            raise ExceptionError("task exception needs a participant prompt")
        if self.kind in (TaskKind.CHANGE_SUBGOAL, TaskKind.DELETE_SUBGOAL) \
                and self.target is None:
            raise ExceptionError(f"{self.kind.value} needs a target index")
        if self.kind in (TaskKind.ADD_SUBGOAL, TaskKind.CHANGE_SUBGOAL) \
                and self.new_landmark is None:
            raise ExceptionError(f"{self.kind.value} needs a landmark")

    def to_wire(self) -> dict:
        msg = {"exc": self.kind.value, "prompt": self.prompt}
        if self.target is not None:
            msg["target"] = self.target
        if self.new_landmark is not None:
            msg["landmark"] = self.new_landmark
        if self.description is not None:
            msg["description"] = self.description
        return msg

    @classmethod
    def from_wire(cls, msg: dict) -> "TaskException":
        return cls(TaskKind(msg["exc"]), msg["prompt"],
                   target=msg.get("target"),
                   new_landmark=msg.get("landmark"),
                   description=msg.get("description"))


@dataclass(frozen=True)
class WorldCondition:
    weather: Weather = Weather.CLEAR
    daylight: Daylight = Daylight.DAY
    blocked: frozenset[tuple[str, float, float]] = frozenset()
    obstacles: tuple[tuple[str, float, float], ...] = ()

    def blocked_lane_ids(self) -> frozenset[str]:
        return frozenset(lane for lane, _, _ in self.blocked)

    def recommended_speed_kmh(self) -> int:
        """UI hint only; weather never couples into the dynamics."""
        if self.weather is Weather.FOG:
            return 10
        if self.weather is Weather.RAIN or self.daylight is Daylight.NIGHT:
            return 15
        return 20


def apply_env(world: WorldCondition, e: EnvException, town: TownMap,
              ) -> WorldCondition:
    """Fold one environmental exception into the world condition."""
    if e.kind is EnvKind.WEATHER_CHANGE:
        return replace(world, weather=e.weather)
    if e.kind is EnvKind.TIME_OF_DAY_CHANGE:
        return replace(world, daylight=e.daylight)
    if e.kind is EnvKind.ROADBLOCK:
        if not town.has_lane(e.blocked_lane):
            raise ExceptionError(f"unknown lane {e.blocked_lane!r}")
        lane = town.lane(e.blocked_lane)
        if e.s_from < 0 or e.s_to > lane.length:
            raise ExceptionError(
                f"blocked interval [{e.s_from:g}, {e.s_to:g}] outside "
                f"lane {e.blocked_lane!r} (length {lane.length:g})")
        interval = (e.blocked_lane, float(e.s_from), float(e.s_to))
        return replace(world, blocked=world.blocked | {interval})
    obstacle = (e.obstacle, float(e.position[0]), float(e.position[1]))
    return replace(world, obstacles=world.obstacles + (obstacle,))


def apply_task(scenario: ScenarioState, e: TaskException, town: TownMap,
               ) -> tuple[ScenarioState, str]:
    """Apply a task exception; returns the participant-only prompt."""
    subgoals = list(scenario.subgoals)
    if e.kind is TaskKind.ADD_SUBGOAL:
        active = [sg for sg in subgoals
                  if sg.status is not SubgoalStatus.ABANDONED]
        if len(active) >= MAX_SUBGOALS:
            raise ExceptionError("subgoal list already at capacity")
        lm = town.landmark(e.new_landmark)
        subgoals.append(Subgoal(lm, e.description or f"Visit {lm.name}"))
    elif e.kind is TaskKind.CHANGE_SUBGOAL:
        _check_target(subgoals, e.target)
        lm = town.landmark(e.new_landmark)
        old = subgoals[e.target]
        subgoals[e.target] = replace(old, landmark=lm,
                                     status=SubgoalStatus.PENDING)
    else:
        _check_target(subgoals, e.target)
        subgoals[e.target] = replace(subgoals[e.target],
                                     status=SubgoalStatus.ABANDONED)

    new_scenario = replace(scenario, subgoals=subgoals)
    # final destination: last non-abandoned subgoal
    for i in range(len(subgoals) - 1, -1, -1):
        if subgoals[i].status is not SubgoalStatus.ABANDONED:
            new_scenario.final_destination_index = i
            break
    return new_scenario, e.prompt


def _check_target(subgoals, target):
    if not 0 <= target < len(subgoals):
        raise ExceptionError(f"subgoal index {target} out of range")
