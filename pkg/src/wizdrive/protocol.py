"""Wire protocol between the operator consoles and the session host.

Messages are single JSON objects with a "type" field. Validation here
is shared by the websocket server, the scripted runner and the CLI
checker, so every intake path refuses the same inputs.
"""

from __future__ import annotations

import json

from .dialogue import MentalAction
from .exception_engine import EnvException, ExceptionError, TaskException
from .maneuver import ManeuverCommand
from .scenario import Role

PROTOCOL_VERSION = 1

CLIENT_TYPES = ("join", "command", "mental", "chat",
                "env_exception", "task_exception")
SERVER_TYPES = ("welcome", "state", "chat", "prompt", "task_update",
                "error", "bye")

# which roles may send which message type
AUTHORIZED = {
    "command": frozenset({Role.CO_WIZARD}),
    "mental": frozenset({Role.CO_WIZARD}),
    "chat": frozenset({Role.PARTICIPANT, Role.CO_WIZARD}),
    "env_exception": frozenset({Role.AD_WIZARD}),
    "task_exception": frozenset({Role.AD_WIZARD}),
}


class ProtocolError(ValueError):
    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail

    def to_wire(self) -> dict:
        return {"type": "error", "code": self.code, "detail": self.detail}


def parse_message(raw) -> dict:
    if isinstance(raw, (str, bytes)):
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ProtocolError("bad_json", str(e))
    else:
        msg = raw
    if not isinstance(msg, dict) or "type" not in msg:
        raise ProtocolError("bad_message", "message must be an object "
                            "with a 'type' field")
    return msg


def validate_join(msg: dict) -> Role:
    try:
        return Role(msg.get("role", ""))
    except ValueError:
        raise ProtocolError(
            "bad_role", f"role must be one of "
            f"{[r.value for r in Role]}, got {msg.get('role')!r}")


def validate_client_message(msg: dict, role: Role) -> tuple[str, dict]:
    """Check type, authorization and body; returns (type, body).

    The body is parsed through the same constructors the session uses,
    so a message that validates here is applicable (map-dependent
    checks excepted).
    """
    mtype = msg["type"]
    if mtype not in CLIENT_TYPES:
        raise ProtocolError("unknown_type", f"unknown message type {mtype!r}")
    if mtype == "join":
        raise ProtocolError("already_joined", "join is only valid once")
    allowed = AUTHORIZED[mtype]
    if role not in allowed:
        raise ProtocolError(
            "forbidden",
            f"role {role.value!r} may not send {mtype!r} "
            f"(allowed: {sorted(r.value for r in allowed)})")
    body = {k: v for k, v in msg.items() if k != "type"}
    try:
        if mtype == "command":
            ManeuverCommand.from_wire(body)
        elif mtype == "mental":
            MentalAction.from_wire(body)
        elif mtype == "chat":
            if not isinstance(body.get("text"), str) or not body["text"]:
                raise ValueError("chat needs non-empty 'text'")
        elif mtype == "env_exception":
            EnvException.from_wire(body)
        elif mtype == "task_exception":
            TaskException.from_wire(body)
    except ProtocolError:
        raise
    except (KeyError, ValueError, TypeError, ExceptionError) as e:
        raise ProtocolError("bad_body", f"{mtype}: {e}")
    return mtype, body


def check_line(raw: str, role_name: str) -> dict:
    """One-shot validation verdict for external tooling (CLI, frontend
    tests). Never raises."""
    try:
        msg = parse_message(raw)
        if msg.get("type") == "join":
            validate_join(msg)
            return {"ok": True, "type": "join"}
        role = Role(role_name)
        mtype, _ = validate_client_message(msg, role)
        return {"ok": True, "type": mtype}
    except ProtocolError as e:
        return {"ok": False, "code": e.code, "detail": e.detail}
    except ValueError as e:
        return {"ok": False, "code": "bad_role", "detail": str(e)}
