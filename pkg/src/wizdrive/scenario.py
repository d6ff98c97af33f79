"""Storyboard templates, seeded instantiation and the subgoal lifecycle."""

from __future__ import annotations

import json
import math
import random
import string
from dataclasses import dataclass, field, replace
from enum import Enum

from .town_map import Landmark, TownMap, Waypoint, landmark_anchor
from .vehicle import STOP_SPEED_EPS, VehicleState

SUBGOAL_RADIUS_M = 2.0
MAX_SUBGOALS = 6
MIN_SUBGOALS = 2

# category path in templates -> landmark category in maps
CATEGORY_PATHS = {
    "places.stores": "store",
    "places.restaurants": "restaurant",
    "places.residential": "residential",
    "places.gas": "gas",
    "places.people": "person",
}

# items that can be "picked up" at each landmark, for $X.items dependents
ITEM_CATALOG = {
    "BurgerKing": ["a whopper", "onion rings", "a milkshake"],
    "Coco": ["bubble tea", "taro smoothie"],
    "KFC": ["fried chicken", "mashed potatoes", "biscuits"],
    "Panera": ["a baguette", "broccoli soup", "a bagel"],
    "Qdoba": ["a burrito", "chips and queso"],
    "Ikea": ["a bookshelf", "a desk lamp", "cushions", "a rug"],
    "SevenEleven": ["snacks", "coffee", "batteries", "ice"],
    "Shell": ["a gas can", "motor oil"],
    "House": ["a spare key", "moving boxes"],
    "Person": ["a package"],
}


class SubgoalStatus(str, Enum):
    PENDING = "Pending"
    ONGOING = "Ongoing"
    COMPLETE = "Complete"
    ABANDONED = "Abandoned"


class Role(str, Enum):
    PARTICIPANT = "participant"
    CO_WIZARD = "co_wizard"
    AD_WIZARD = "ad_wizard"


class CategoryExhausted(ValueError):
    """Not enough landmarks of a required category on this map."""


@dataclass(frozen=True)
class StoryboardTemplate:
    story: str
    subgoals: tuple[dict, ...]          # {"destination": var, "description": text}
    variables: tuple[tuple[str, str], ...]
    dependents: tuple[tuple[str, str], ...] = ()
    hidden_from_wizard: tuple[str, ...] = ()

    def __post_init__(self):
        names = {v for v, _ in self.variables}
        dep_names = {d for d, _ in self.dependents}
        for text in (self.story, *(sg["description"] for sg in self.subgoals)):
            for var in _template_vars(text):
                if var not in names | dep_names:
                    raise ValueError(f"unbound template variable ${var}")
        for h in self.hidden_from_wizard:
            if h not in names:
                raise ValueError(f"hidden_from_wizard names unknown var {h!r}")
        if not MIN_SUBGOALS <= len(self.subgoals) <= MAX_SUBGOALS:
            raise ValueError("template must declare 2-6 subgoals")

    @classmethod
    def from_document(cls, doc) -> "StoryboardTemplate":
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        return cls(
            story=doc["story"],
            subgoals=tuple(doc["subgoals"]),
            variables=tuple((n, p) for n, p in doc["variables"]),
            dependents=tuple((n, p) for n, p in doc.get("dependents", [])),
            hidden_from_wizard=tuple(doc.get("hidden_from_wizard", [])),
        )


def _template_vars(text: str):
    out = []
    i = 0
    while i < len(text):
        if text[i] == "$":
            j = i + 1
            while j < len(text) and (text[j] in string.ascii_letters
                                     or text[j].isdigit()):
                j += 1
            if j > i + 1:
                out.append(text[i + 1:j])
            i = j
        else:
            i += 1
    return out


def _substitute(text: str, bindings: dict[str, str]) -> str:
    for var in sorted(bindings, key=len, reverse=True):
        text = text.replace(f"${var}", bindings[var])
    return text


@dataclass(frozen=True)
class Subgoal:
    landmark: Landmark
    description: str
    status: SubgoalStatus = SubgoalStatus.PENDING
    hidden: bool = False


@dataclass
class ScenarioState:
    story: str
    subgoals: list[Subgoal]
    final_destination_index: int
    bindings: dict[str, str]
    departure: Waypoint
    hidden_vars: tuple[str, ...] = ()

    def landmark_names(self):
        return [sg.landmark.name for sg in self.subgoals]


def instantiate(template: StoryboardTemplate, town: TownMap,
                seed: int) -> ScenarioState:
    """Bind template variables to distinct map landmarks, seeded."""
    rng = random.Random(seed)
    by_category: dict[str, list[Landmark]] = {}
    for lm in town.landmarks:
        by_category.setdefault(lm.category, []).append(lm)
    for pool in by_category.values():
        pool.sort(key=lambda lm: lm.name)
        rng.shuffle(pool)

    bindings: dict[str, str] = {}
    bound: dict[str, Landmark] = {}
    for name, path in template.variables:
        category = CATEGORY_PATHS.get(path)
        if category is None:
            raise ValueError(f"unknown category path {path!r}")
        pool = [lm for lm in by_category.get(category, [])
                if lm.name not in bindings.values()]
        if not pool:
            raise CategoryExhausted(
                f"map {town.town_id!r} has no spare {category!r} landmark "
                f"for ${name}")
        chosen = pool[0]
        bindings[name] = chosen.name
        bound[name] = chosen

    used_items: dict[str, set[str]] = {}
    for name, path in template.dependents:
        parent, attr = path.split(".", 1)
        if attr != "items":
            raise ValueError(f"unknown dependent path {path!r}")
        items = ITEM_CATALOG[bindings[parent]]
        taken = used_items.setdefault(parent, set())
        avail = [it for it in items if it not in taken] or list(items)
        bindings[name] = rng.choice(avail)
        taken.add(bindings[name])

    subgoals = []
    for sg in template.subgoals:
        var = sg["destination"].lstrip("$")
        subgoals.append(Subgoal(
            landmark=bound[var],
            description=_substitute(sg["description"], bindings),
            hidden=var in template.hidden_from_wizard,
        ))

    lanes = town.lanes
    dep_lane = lanes[rng.randrange(len(lanes))]
    dep_s = float(rng.randrange(int(dep_lane.length)))
    departure = dep_lane.waypoint_at(dep_s)

    return ScenarioState(
        story=_substitute(template.story, bindings),
        subgoals=subgoals,
        final_destination_index=len(subgoals) - 1,
        bindings=bindings,
        departure=departure,
        hidden_vars=template.hidden_from_wizard,
    )


def check_subgoal(state: VehicleState, town: TownMap, sg: Subgoal) -> bool:
    """True when the stopped vehicle is within 2 m of the landmark anchor."""
    if sg.status not in (SubgoalStatus.PENDING, SubgoalStatus.ONGOING):
        return False
    if state.speed > STOP_SPEED_EPS:
        return False
    anchor = landmark_anchor(town, sg.landmark)
    return math.dist(state.position, anchor.position) <= SUBGOAL_RADIUS_M


def role_view(scenario: ScenarioState, role: Role) -> dict:
    """Project the scenario onto what one role is allowed to see."""
    if role is Role.AD_WIZARD:
        return {
            "story": scenario.story,
            "subgoals": [_subgoal_view(sg, located=True)
                         for sg in scenario.subgoals],
            "final_destination_index": scenario.final_destination_index,
            "bindings": dict(scenario.bindings),
        }
    if role is Role.PARTICIPANT:
        # the participant knows hidden destinations from the story text,
        # not as map coordinates
        return {
            "story": scenario.story,
            "subgoals": [_subgoal_view(sg, located=not sg.hidden)
                         for sg in scenario.subgoals],
            "final_destination_index": scenario.final_destination_index,
        }
    # Co-Wizard: landmark list only, no task interface, no statuses;
    # hidden landmarks appear by name but carry no position.
    landmarks = []
    seen = set()
    for sg in scenario.subgoals:
        if sg.landmark.name in seen:
            continue
        seen.add(sg.landmark.name)
        entry = {"name": sg.landmark.name, "located": not sg.hidden}
        if not sg.hidden:
            entry["position"] = list(sg.landmark.position)
        landmarks.append(entry)
    return {"landmarks": landmarks}


def _subgoal_view(sg: Subgoal, located: bool) -> dict:
    view = {
        "landmark": sg.landmark.name,
        "description": sg.description,
        "status": sg.status.value,
    }
    if located:
        view["position"] = list(sg.landmark.position)
    return view


def complete_subgoal(scenario: ScenarioState, index: int) -> None:
    sg = scenario.subgoals[index]
    if sg.status in (SubgoalStatus.PENDING, SubgoalStatus.ONGOING):
        scenario.subgoals[index] = replace(sg, status=SubgoalStatus.COMPLETE)


def all_done(scenario: ScenarioState) -> bool:
    return all(sg.status in (SubgoalStatus.COMPLETE, SubgoalStatus.ABANDONED)
               for sg in scenario.subgoals)
