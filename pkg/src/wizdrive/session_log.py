"""Append-only session log: canonical JSON Lines, one merged event
stream, with validation and the two-file compatibility export.

Simulated time is stored as an integer tick count (30 ticks per second)
so replay arithmetic never drifts.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum

LOG_FORMAT_VERSION = 1
TICKS_PER_SECOND = 30
SNAPSHOT_EVERY_TICKS = 30     # 1 Hz keyframes


class EventKind(str, Enum):
    CONTROL = "Control"
    MANEUVER_CMD = "ManeuverCmd"
    MENTAL_ACTION = "MentalAction"
    UTTERANCE = "Utterance"
    ENV_EXCEPTION = "EnvException"
    TASK_EXCEPTION = "TaskException"
    SUBGOAL_STATUS = "SubgoalStatus"
    WORLD_SNAPSHOT = "WorldSnapshot"


# events written to the interaction log by `export --split`; the rest
# belong to the world log
INTERACTION_KINDS = frozenset({
    EventKind.MANEUVER_CMD, EventKind.MENTAL_ACTION, EventKind.UTTERANCE,
    EventKind.ENV_EXCEPTION, EventKind.TASK_EXCEPTION,
    EventKind.SUBGOAL_STATUS,
})

_REQUIRED_PAYLOAD_KEYS = {
    EventKind.CONTROL: {"throttle", "steer", "brake"},
    EventKind.MANEUVER_CMD: {"cmd"},
    EventKind.MENTAL_ACTION: {"mental"},
    EventKind.UTTERANCE: {"speaker", "text", "t_start", "t_end"},
    EventKind.ENV_EXCEPTION: {"exc"},
    EventKind.TASK_EXCEPTION: {"exc", "prompt"},
    EventKind.SUBGOAL_STATUS: {"index", "status"},
    EventKind.WORLD_SNAPSHOT: {"vehicle", "world", "subgoals"},
}


class LogCorruption(ValueError):
    """Sequence or time regression on append, or unreadable file."""


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class LogEvent:
    seq: int
    tick: int
    kind: EventKind
    payload: dict

    @property
    def t(self) -> float:
        return self.tick / TICKS_PER_SECOND

    def to_record(self) -> dict:
        return {"seq": self.seq, "tick": self.tick, "kind": self.kind.value,
                "payload": self.payload}

    @classmethod
    def from_record(cls, rec: dict) -> "LogEvent":
        return cls(rec["seq"], rec["tick"], EventKind(rec["kind"]),
                   rec["payload"])


@dataclass
class SessionLog:
    header: dict
    events: list[LogEvent] = field(default_factory=list)

    def __post_init__(self):
        if self.header.get("format") != LOG_FORMAT_VERSION:
            raise LogCorruption(
                f"unsupported log format {self.header.get('format')!r}")

    def append(self, e: LogEvent) -> None:
        if self.events:
            last = self.events[-1]
            if e.seq != last.seq + 1:
                raise LogCorruption(
                    f"sequence gap: expected {last.seq + 1}, got {e.seq}")
            if e.tick < last.tick:
                raise LogCorruption(
                    f"time regression: tick {e.tick} after {last.tick}")
        elif e.seq != 0:
            raise LogCorruption(f"first event must have seq 0, got {e.seq}")
        self.events.append(e)

    def to_jsonl(self) -> str:
        lines = [canonical_json({"format": LOG_FORMAT_VERSION,
                                 **{k: v for k, v in self.header.items()
                                    if k != "format"}})]
        lines.extend(canonical_json(e.to_record()) for e in self.events)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "SessionLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise LogCorruption("empty log file")
        log = cls(json.loads(lines[0]))
        for ln in lines[1:]:
            log.append(LogEvent.from_record(json.loads(ln)))
        return log

    @classmethod
    def load(cls, path) -> "SessionLog":
        with open(path, encoding="utf-8") as fh:
            return cls.from_jsonl(fh.read())

    def save(self, path, fsync: bool = False) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_jsonl())
            if fsync:
                fh.flush()
                os.fsync(fh.fileno())

    def events_of(self, *kinds: EventKind):
        return [e for e in self.events if e.kind in kinds]

    def duration_ticks(self) -> int:
        return self.events[-1].tick if self.events else 0


def validate(log: SessionLog) -> dict:
    """Structural report: invariant findings plus per-kind counts."""
    findings = []
    counts = {k.value: 0 for k in EventKind}
    last_seq, last_tick = -1, 0
    snapshot_ticks = []
    utterance_ids = set()

    for e in log.events:
        counts[e.kind.value] += 1
        if e.seq != last_seq + 1:
            findings.append(f"seq gap at {e.seq} (expected {last_seq + 1})")
        if e.tick < last_tick:
            findings.append(f"tick regression at seq {e.seq}")
        last_seq, last_tick = e.seq, e.tick
        missing = _REQUIRED_PAYLOAD_KEYS[e.kind] - set(e.payload)
        if missing:
            findings.append(
                f"seq {e.seq} {e.kind.value} payload missing {sorted(missing)}")
        if e.kind is EventKind.WORLD_SNAPSHOT:
            snapshot_ticks.append(e.tick)
        if e.kind is EventKind.UTTERANCE:
            utterance_ids.add(str(e.seq))

    for e in log.events:
        if e.kind is EventKind.UTTERANCE:
            eu = e.payload.get("eu_id", "")
            if eu and eu not in utterance_ids:
                findings.append(
                    f"seq {e.seq} utterance cites unknown EU id {eu!r}")

    if log.events:
        expected = set(range(0, log.duration_ticks() + 1,
                             SNAPSHOT_EVERY_TICKS))
        missing_snaps = expected - set(snapshot_ticks)
        if missing_snaps:
            findings.append(
                f"missing 1 Hz snapshots at ticks "
                f"{sorted(missing_snaps)[:5]}"
                + ("..." if len(missing_snaps) > 5 else ""))

    return {"findings": findings, "counts": counts,
            "events": len(log.events),
            "duration_s": log.duration_ticks() / TICKS_PER_SECOND}


def export_split(log: SessionLog) -> tuple[str, str]:
    """Two-file export: (interaction log, world log), both JSONL."""
    inter, world = [], []
    header = canonical_json({"format": LOG_FORMAT_VERSION,
                             **{k: v for k, v in log.header.items()
                                if k != "format"}})
    for e in log.events:
        line = canonical_json(e.to_record())
        (inter if e.kind in INTERACTION_KINDS else world).append(line)
    return ("\n".join([header] + inter) + "\n",
            "\n".join([header] + world) + "\n")
