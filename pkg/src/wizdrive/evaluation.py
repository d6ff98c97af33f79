"""Teacher-forced evaluation harness: example extraction for the three
tasks (UfN, RfN, NfD), the metrics, splits and reference predictors.

All history given to a predictor is ground truth; an example's context
never contains an event at or after its own timestamp.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .maneuver import NAV_KINDS, ManeuverKind
from .session_log import EventKind, SessionLog, canonical_json
from .vehicle import normalize_yaw

TASKS = ("UfN", "RfN", "NfD")
DEFAULT_TOLERANCE_DEG = 15.0

SEEN_TOWNS = ("town1", "town3", "town5")
UNSEEN_TOWNS = ("town2",)

_NAV_VALUES = frozenset(k.value for k in NAV_KINDS)
_ANGLE_KINDS = frozenset({ManeuverKind.LANE_SWITCH.value,
                          ManeuverKind.J_TURN.value})

# events a predictor is allowed to condition on
_CONTEXT_KINDS = (EventKind.MANEUVER_CMD, EventKind.MENTAL_ACTION,
                  EventKind.UTTERANCE, EventKind.ENV_EXCEPTION,
                  EventKind.TASK_EXCEPTION, EventKind.SUBGOAL_STATUS)


@dataclass(frozen=True)
class EvalExample:
    example_id: str
    task: str
    t: float
    map_id: str
    context: tuple[dict, ...]       # ground-truth history, t strictly < self.t
    gold: dict

    def to_record(self) -> dict:
        return {"id": self.example_id, "task": self.task,
                "t": round(self.t, 6), "map": self.map_id,
                "context": list(self.context), "gold": self.gold}


def _context_before(log: SessionLog, tick: int) -> tuple[dict, ...]:
    out = []
    for e in log.events:
        if e.tick >= tick:
            break
        if e.kind in _CONTEXT_KINDS:
            out.append({"t": round(e.t, 6), "kind": e.kind.value,
                        "payload": e.payload})
    return tuple(out)


def extract(task: str, logs) -> tuple[list[EvalExample], list[str]]:
    """Pull teacher-forcing examples out of validated session logs.

    logs: iterable of (session_id, SessionLog). Returns (examples,
    report) where report lists skipped decision points.
    """
    if task not in TASKS:
        raise ValueError(f"task must be one of {TASKS}, got {task!r}")
    examples: list[EvalExample] = []
    report: list[str] = []
    for session_id, log in sorted(logs, key=lambda p: p[0]):
        map_id = log.header.get("map", "")
        for e in log.events:
            if task in ("UfN", "RfN") and e.kind is EventKind.UTTERANCE:
                wanted = "HUM" if task == "UfN" else "BOT"
                if e.payload["speaker"] != wanted:
                    continue
                spans = e.payload.get("spans", [])
                if not spans:
                    report.append(f"{session_id}: unannotated {wanted} "
                                  f"utterance at seq {e.seq}, skipped")
                    continue
                ctx = _context_before(log, e.tick)
                for i, sp in enumerate(spans):
                    examples.append(EvalExample(
                        f"{session_id}:{task}:{e.seq}:{i}", task, e.t,
                        map_id, ctx,
                        {"move": sp["move"],
                         "slots": sorted(map(list, sp.get("slots", [])))}))
            elif task == "NfD" and e.kind is EventKind.MANEUVER_CMD:
                kind = e.payload["cmd"]
                if kind not in _NAV_VALUES:
                    continue
                gold = {"action": kind}
                if kind in _ANGLE_KINDS:
                    gold["angle"] = e.payload["angle"]
                examples.append(EvalExample(
                    f"{session_id}:{task}:{e.seq}:0", task, e.t, map_id,
                    _context_before(log, e.tick), gold))
    return examples, report


def examples_jsonl(examples) -> str:
    lines = [canonical_json(ex.to_record()) for ex in examples]
    return "\n".join(lines) + "\n" if lines else ""


# -- metrics -------------------------------------------------------------

def _check_aligned(preds, golds):
    if len(preds) != len(golds):
        raise ValueError(f"{len(preds)} predictions vs {len(golds)} golds")
    if not golds:
        raise ValueError("empty evaluation set")


def _move_of(x) -> str:
    return x["move"] if isinstance(x, dict) else x


def _pairs_of(x) -> frozenset:
    if isinstance(x, dict):
        x = x.get("slots", [])
    return frozenset((l, v) for l, v in x)


def move_accuracy(preds, golds) -> float:
    _check_aligned(preds, golds)
    hits = sum(_move_of(p) == _move_of(g) for p, g in zip(preds, golds))
    return hits / len(golds)


def slot_f1(preds, golds, macro: bool = False) -> float:
    """Micro-averaged F1 over (label, value) pairs pooled across
    examples; macro=True averages per-label F1 instead."""
    _check_aligned(preds, golds)
    pred_sets = [_pairs_of(p) for p in preds]
    gold_sets = [_pairs_of(g) for g in golds]

    def f1_for(label=None):
        tp = fp = fn = 0
        for ps, gs in zip(pred_sets, gold_sets):
            if label is not None:
                ps = {pair for pair in ps if pair[0] == label}
                gs = {pair for pair in gs if pair[0] == label}
            tp += len(ps & gs)
            fp += len(ps - gs)
            fn += len(gs - ps)
        if tp == 0:
            return 0.0
        p = tp / (tp + fp)
        r = tp / (tp + fn)
        return 2 * p * r / (p + r)

    if not macro:
        return f1_for()
    labels = sorted({l for s in pred_sets + gold_sets for l, _ in s})
    if not labels:
        return 0.0
    return sum(f1_for(l) for l in labels) / len(labels)


def _action_of(x):
    if isinstance(x, dict):
        return x["action"], x.get("angle")
    return x if len(x) == 2 else (x[0], None)


def action_accuracy(preds, golds, tol: float = DEFAULT_TOLERANCE_DEG,
                    ) -> tuple[float, float]:
    """(kind accuracy, joint accuracy). Joint requires the wrap-aware
    argument deviation to stay under tol; argument-free actions are
    joint-correct on the kind alone."""
    _check_aligned(preds, golds)
    kind_hits = joint_hits = 0
    for p, g in zip(preds, golds):
        pk, pa = _action_of(p)
        gk, ga = _action_of(g)
        if pk != gk:
            continue
        kind_hits += 1
        if ga is None:
            joint_hits += 1
        elif pa is not None and abs(normalize_yaw(pa - ga)) < tol:
            joint_hits += 1
    n = len(golds)
    return kind_hits / n, joint_hits / n


# -- splits --------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    train: tuple[str, ...]
    val_seen: tuple[str, ...]
    val_unseen: tuple[str, ...]
    test_seen: tuple[str, ...]
    test_unseen: tuple[str, ...]

    def folds(self) -> dict:
        return {"train": self.train, "val_seen": self.val_seen,
                "val_unseen": self.val_unseen, "test_seen": self.test_seen,
                "test_unseen": self.test_unseen}

    def check(self, towns: dict) -> None:
        """towns: session id -> town id. Raises unless the folds
        partition the sessions and the unseen folds hold only unseen
        towns."""
        all_ids = [sid for fold in self.folds().values() for sid in fold]
        if len(all_ids) != len(set(all_ids)):
            raise ValueError("folds overlap")
        if set(all_ids) != set(towns):
            raise ValueError("folds do not cover the corpus")
        for fold in ("val_unseen", "test_unseen"):
            for sid in self.folds()[fold]:
                if towns[sid] not in UNSEEN_TOWNS:
                    raise ValueError(
                        f"{fold} contains seen-town session {sid!r}")
        for fold in ("train", "val_seen", "test_seen"):
            for sid in self.folds()[fold]:
                if towns[sid] in UNSEEN_TOWNS:
                    raise ValueError(
                        f"{fold} contains unseen-town session {sid!r}")


def make_split(towns: dict) -> SplitSpec:
    """Deterministic split by sorted session id: seen-town sessions go
    60/20/20 to train/val/test, unseen-town sessions 50/50 to the
    unseen val/test folds."""
    seen = sorted(s for s, t in towns.items() if t not in UNSEEN_TOWNS)
    unseen = sorted(s for s, t in towns.items() if t in UNSEEN_TOWNS)
    n = len(seen)
    a, b = (n * 3) // 5, (n * 4) // 5
    half = len(unseen) // 2
    return SplitSpec(tuple(seen[:a]), tuple(seen[a:b]),
                     tuple(unseen[:half]), tuple(seen[b:]),
                     tuple(unseen[half:]))


# -- reference predictors ------------------------------------------------

class MajorityPredictor:
    """Most common move / action kind in the training fold; the angle
    argument is the circular mean over that kind's training angles."""

    def __init__(self, task: str):
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        self.task = task
        self._move = None
        self._action = None
        self._angle = None

    def fit(self, examples) -> "MajorityPredictor":
        examples = list(examples)
        if not examples:
            raise ValueError("empty training fold")
        if self.task in ("UfN", "RfN"):
            counts = Counter(ex.gold["move"] for ex in examples)
            # deterministic tie-break by name
            self._move = min(counts, key=lambda m: (-counts[m], m))
        else:
            counts = Counter(ex.gold["action"] for ex in examples)
            self._action = min(counts, key=lambda a: (-counts[a], a))
            angles = [ex.gold["angle"] for ex in examples
                      if ex.gold["action"] == self._action
                      and "angle" in ex.gold]
            if angles:
                sx = sum(math.cos(math.radians(a)) for a in angles)
                sy = sum(math.sin(math.radians(a)) for a in angles)
                self._angle = normalize_yaw(
                    math.degrees(math.atan2(sy, sx)))
        return self

    def predict(self, example) -> dict:
        if self.task in ("UfN", "RfN"):
            return {"move": self._move, "slots": []}
        out = {"action": self._action}
        if self._angle is not None:
            out["angle"] = self._angle
        return out


class CopyLastPredictor:
    """Repeats the most recent same-kind event from the ground-truth
    context; falls back to a fixed default at cold start."""

    _DEFAULTS = {"UfN": {"move": "Inform", "slots": []},
                 "RfN": {"move": "Inform", "slots": []},
                 "NfD": {"action": "LaneFollow"}}

    def __init__(self, task: str):
        if task not in TASKS:
            raise ValueError(f"unknown task {task!r}")
        self.task = task

    def predict(self, example) -> dict:
        if self.task in ("UfN", "RfN"):
            wanted = "HUM" if self.task == "UfN" else "BOT"
            for ev in reversed(example.context):
                if ev["kind"] != EventKind.UTTERANCE.value:
                    continue
                if ev["payload"]["speaker"] != wanted:
                    continue
                spans = ev["payload"].get("spans", [])
                if spans:
                    sp = spans[-1]
                    return {"move": sp["move"],
                            "slots": sorted(map(list, sp.get("slots", [])))}
            return dict(self._DEFAULTS[self.task])
        for ev in reversed(example.context):
            if ev["kind"] != EventKind.MANEUVER_CMD.value:
                continue
            if ev["payload"]["cmd"] not in _NAV_VALUES:
                continue
            out = {"action": ev["payload"]["cmd"]}
            if "angle" in ev["payload"]:
                out["angle"] = ev["payload"]["angle"]
            return out
        return dict(self._DEFAULTS["NfD"])


def score(task: str, preds, golds, tol: float = DEFAULT_TOLERANCE_DEG,
          macro: bool = False) -> dict:
    """Task-appropriate metric bundle for aligned pred/gold lists."""
    if task in ("UfN", "RfN"):
        return {"move_accuracy": move_accuracy(preds, golds),
                "slot_f1": slot_f1(preds, golds, macro=macro)}
    acc, joint = action_accuracy(preds, golds, tol=tol)
    return {"action_accuracy": acc, "joint_accuracy": joint}
