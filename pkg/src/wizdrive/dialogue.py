"""Dialogue model: the move/slot ontology, annotated utterances, the
exchange/transaction structure and Co-Wizard mental actions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .town_map import TownMap, junction_adjacency

SLOT_LABELS = ("Action", "Street", "Landmark", "Status", "Object")
SLOT_COUNTS = {"Action": 10, "Street": 17, "Landmark": 12,
               "Status": 6, "Object": 24}
REQUIRED_MOVES = ("Instruct", "Inform", "Explain", "Ask", "Irrelevant")

EU_EXCEPTION_WINDOW_S = 60.0


class OntologyError(ValueError):
    """Ontology file fails the fixed vocabulary contract."""


@dataclass(frozen=True)
class DialogueOntology:
    moves: tuple[str, ...]
    slots: dict[str, tuple[str, ...]]

    def __post_init__(self):
        for m in REQUIRED_MOVES:
            if m not in self.moves:
                raise OntologyError(f"ontology missing required move {m!r}")
        if tuple(self.slots) != SLOT_LABELS:
            raise OntologyError(
                f"slot labels must be exactly {SLOT_LABELS}, "
                f"got {tuple(self.slots)}")
        for label, values in self.slots.items():
            if len(values) != SLOT_COUNTS[label]:
                raise OntologyError(
                    f"{label} must have {SLOT_COUNTS[label]} values, "
                    f"got {len(values)}")
            if len(set(values)) != len(values):
                raise OntologyError(f"duplicate values in {label}")
            wanted = ("Queried", "Unlabeled") if label == "Object" \
                else ("Queried", "Unknown")
            for v in wanted:
                if v not in values:
                    raise OntologyError(f"{label} must include {v!r}")

    @classmethod
    def load(cls, source=None) -> "DialogueOntology":
        if source is None:
            text = resources.files("wizdrive.data").joinpath(
                "ontology.json").read_text()
            doc = json.loads(text)
        elif isinstance(source, dict):
            doc = source
        else:
            with open(source, encoding="utf-8") as fh:
                doc = json.load(fh)
        return cls(tuple(doc["moves"]),
                   {k: tuple(v) for k, v in doc["slots"].items()})


class Speaker(str, Enum):
    HUM = "HUM"
    BOT = "BOT"


@dataclass(frozen=True)
class Span:
    start: int
    end: int                      # exclusive character range
    move: str
    slot_values: frozenset[tuple[str, str]] = frozenset()


@dataclass(frozen=True)
class UtteranceEvent:
    speaker: Speaker
    text: str
    t_start: float
    t_end: float
    spans: tuple[Span, ...] = ()
    eu_id: str = ""
    tu_id: str = ""

    def to_wire(self) -> dict:
        return {
            "speaker": self.speaker.value,
            "text": self.text,
            "t_start": self.t_start,
            "t_end": self.t_end,
            "spans": [
                {"start": sp.start, "end": sp.end, "move": sp.move,
                 "slots": sorted(map(list, sp.slot_values))}
                for sp in self.spans
            ],
            "eu_id": self.eu_id,
            "tu_id": self.tu_id,
        }

    @classmethod
    def from_wire(cls, msg: dict) -> "UtteranceEvent":
        spans = tuple(
            Span(sp["start"], sp["end"], sp["move"],
                 frozenset((l, v) for l, v in sp.get("slots", [])))
            for sp in msg.get("spans", [])
        )
        return cls(Speaker(msg["speaker"]), msg["text"],
                   msg["t_start"], msg["t_end"], spans,
                   msg.get("eu_id", ""), msg.get("tu_id", ""))


def validate_annotation(ont: DialogueOntology, u: UtteranceEvent) -> list[str]:
    """All ontology/structure violations in one pass; empty list = ok."""
    issues = []
    for sp in u.spans:
        if sp.move not in ont.moves:
            issues.append(f"unknown move {sp.move!r}")
        for label, value in sp.slot_values:
            if label not in ont.slots:
                issues.append(f"unknown slot label {label!r}")
            elif value not in ont.slots[label]:
                issues.append(f"value {value!r} outside the "
                              f"{len(ont.slots[label])}-value {label} "
                              f"vocabulary")
    if u.spans:
        ordered = sorted(u.spans, key=lambda sp: sp.start)
        cursor = 0
        for sp in ordered:
            if sp.start != cursor:
                issues.append(
                    f"spans do not partition the utterance at offset "
                    f"{cursor}")
                break
            if sp.end <= sp.start:
                issues.append(f"empty span at offset {sp.start}")
                break
            cursor = sp.end
        else:
            if cursor != len(u.text):
                issues.append("spans do not cover the utterance tail")
    return issues


class MentalKind(str, Enum):
    PLAN_UPDATE = "PlanUpdate"
    GOAL_UPDATE = "GoalUpdate"
    STATUS_UPDATE = "StatusUpdate"
    KNOWLEDGE_UPDATE = "KnowledgeUpdate"
    OTHER = "Other"


@dataclass(frozen=True)
class MentalAction:
    kind: MentalKind
    plan: tuple[str, ...] | None = None                 # junction ids
    goal: tuple[str, ...] | None = None                 # landmark names
    status_pair: tuple[str, str] | None = None          # (landmark, status)
    guess: tuple[float, float] | None = None            # (x, y)

    def __post_init__(self):
        required = {
            MentalKind.PLAN_UPDATE: self.plan,
            MentalKind.GOAL_UPDATE: self.goal,
            MentalKind.STATUS_UPDATE: self.status_pair,
            MentalKind.KNOWLEDGE_UPDATE: self.guess,
            MentalKind.OTHER: True,
        }
        if required[self.kind] is None:
            raise ValueError(f"{self.kind.value} missing its argument")

    def to_wire(self) -> dict:
        msg = {"mental": self.kind.value}
        if self.plan is not None:
            msg["plan"] = list(self.plan)
        if self.goal is not None:
            msg["goal"] = list(self.goal)
        if self.status_pair is not None:
            msg["status_pair"] = list(self.status_pair)
        if self.guess is not None:
            msg["guess"] = list(self.guess)
        return msg

    @classmethod
    def from_wire(cls, msg: dict) -> "MentalAction":
        return cls(MentalKind(msg["mental"]),
                   plan=tuple(msg["plan"]) if "plan" in msg else None,
                   goal=tuple(msg["goal"]) if "goal" in msg else None,
                   status_pair=tuple(msg["status_pair"])
                   if "status_pair" in msg else None,
                   guess=tuple(msg["guess"]) if "guess" in msg else None)


def validate_mental(a: MentalAction, town: TownMap) -> None:
    """Raise on map-inconsistent mental actions."""
    if a.kind is MentalKind.PLAN_UPDATE:
        known = {j.junction_id for j in town.junctions}
        for jid in a.plan:
            if jid not in known:
                raise ValueError(f"unknown junction {jid!r} in plan")
        adj = junction_adjacency(town)
        for j1, j2 in zip(a.plan, a.plan[1:]):
            if j2 not in adj[j1]:
                raise ValueError(
                    f"junctions {j1} and {j2} are not adjacent")
    elif a.kind is MentalKind.GOAL_UPDATE:
        names = {lm.name for lm in town.landmarks}
        for g in a.goal:
            if g not in names:
                raise ValueError(f"unknown landmark {g!r} in goal")


@dataclass
class BeliefState:
    """Latest mental action of each kind, as recorded so far."""
    plan: tuple[str, ...] | None = None
    goal: tuple[str, ...] | None = None
    status_pair: tuple[str, str] | None = None
    guess: tuple[float, float] | None = None

    def apply(self, a: MentalAction) -> None:
        if a.kind is MentalKind.PLAN_UPDATE:
            self.plan = a.plan
        elif a.kind is MentalKind.GOAL_UPDATE:
            self.goal = a.goal
        elif a.kind is MentalKind.STATUS_UPDATE:
            self.status_pair = a.status_pair
        elif a.kind is MentalKind.KNOWLEDGE_UPDATE:
            self.guess = a.guess


@dataclass
class ExchangeUnit:
    eu_id: str
    utterances: list[UtteranceEvent] = field(default_factory=list)
    handled_exception: str = "None"     # Env | Task | None

    @property
    def t_start(self) -> float:
        return self.utterances[0].t_start


def collect_eus(utterances, exception_times) -> list[ExchangeUnit]:
    """Group utterances by eu_id; tag each EU with the most recent
    exception within the attribution window before its first utterance.

    exception_times: iterable of (t, "Env"|"Task").
    """
    eus: dict[str, ExchangeUnit] = {}
    order: list[str] = []
    for u in sorted(utterances, key=lambda u: (u.t_start, u.t_end)):
        key = u.eu_id or f"_solo_{len(eus)}"
        if key not in eus:
            eus[key] = ExchangeUnit(key)
            order.append(key)
        eus[key].utterances.append(u)
    exc = sorted(exception_times)
    for key in order:
        eu = eus[key]
        best = None
        for t, cat in exc:
            if t <= eu.t_start and eu.t_start - t <= EU_EXCEPTION_WINDOW_S:
                best = cat
            elif t > eu.t_start:
                break
        if best:
            eu.handled_exception = best
    return [eus[k] for k in order]


def eu_stats(session_eus) -> dict:
    """Average move and slot counts per EU, split by exception category
    and speaker.

    session_eus: iterable of EU lists, one per session. Returns
    {"eu_counts": {...}, "moves": rows, "slots": rows} where each row is
    keyed (category, speaker, name) -> mean per EU. Categories with no
    EUs yield zero rows.
    """
    categories = ("Env", "Task", "None")
    eu_counts = {c: 0 for c in categories}
    move_totals: dict[tuple[str, str, str], int] = {}
    slot_totals: dict[tuple[str, str, str], int] = {}
    move_names: set[str] = set()
    slot_names: set[str] = set()

    for eus in session_eus:
        for eu in eus:
            cat = eu.handled_exception
            eu_counts[cat] += 1
            for u in eu.utterances:
                for sp in u.spans:
                    k = (cat, u.speaker.value, sp.move)
                    move_totals[k] = move_totals.get(k, 0) + 1
                    move_names.add(sp.move)
                    for label, _value in sp.slot_values:
                        k2 = (cat, u.speaker.value, label)
                        slot_totals[k2] = slot_totals.get(k2, 0) + 1
                        slot_names.add(label)

    def table(totals, names):
        rows = {}
        for cat in categories:
            for speaker in ("HUM", "BOT"):
                for name in sorted(names):
                    total = totals.get((cat, speaker, name), 0)
                    n = eu_counts[cat]
                    rows[(cat, speaker, name)] = total / n if n else 0.0
        return rows

    return {
        "eu_counts": eu_counts,
        "moves": table(move_totals, move_names),
        "slots": table(slot_totals, slot_names),
    }
