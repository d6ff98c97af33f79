"""Desk-scale duo-wizard driving and situated-dialogue platform."""

__version__ = "0.1.0"

from .dialogue import (DialogueOntology, MentalAction, MentalKind, Span,
                       Speaker, UtteranceEvent)
from .exception_engine import (Daylight, EnvException, EnvKind,
                               TaskException, TaskKind, Weather,
                               WorldCondition)
from .maneuver import ManeuverCommand, ManeuverKind, plan_maneuver
from .scenario import Role, ScenarioState, StoryboardTemplate, SubgoalStatus
from .session import ReplayFrame, Session, packaged_map, packaged_template, \
    replay
from .session_log import EventKind, LogEvent, SessionLog
from .town_map import TownMap, junction_route, load_map
from .vehicle import ControlSignal, DrivePolicy, VehicleState

__all__ = [
    "ControlSignal", "Daylight", "DialogueOntology", "DrivePolicy",
    "EnvException", "EnvKind", "EventKind", "LogEvent", "ManeuverCommand",
    "ManeuverKind", "MentalAction", "MentalKind", "ReplayFrame", "Role",
    "ScenarioState", "Session", "SessionLog", "Span", "Speaker",
    "StoryboardTemplate", "SubgoalStatus", "TaskException", "TaskKind",
    "TownMap", "UtteranceEvent", "VehicleState", "Weather",
    "WorldCondition", "junction_route", "load_map", "packaged_map",
    "packaged_template", "plan_maneuver", "replay",
]
