import asyncio
import json

import pytest

from conftest import make_utterance, span
from wizdrive.protocol import (AUTHORIZED, CLIENT_TYPES, ProtocolError,
                               check_line, parse_message,
                               validate_client_message, validate_join)
from wizdrive.scenario import Role
from wizdrive.server import (SessionHost, build_session, dispatch, route,
                             run_scripted_session, state_message,
                             welcome_message)
from wizdrive.session import Outbound

VALID_BODIES = {
    "command": {"cmd": "SpeedChange", "speed": 5},
    "mental": {"mental": "GoalUpdate", "goal": ["KFC"]},
    "chat": make_utterance("HUM", "hello", 0.0, [span(0, 5, "Inform")]),
    "env_exception": {"exc": "WeatherChange", "weather": "rain"},
    "task_exception": {"exc": "DeleteSubgoal", "target": 0, "prompt": "p"},
}


def test_authorization_matrix():
    # every client type against every role, exhaustively
    for mtype, body in VALID_BODIES.items():
        msg = {"type": mtype, **body}
        for role in Role:
            if role in AUTHORIZED[mtype]:
                got, _ = validate_client_message(msg, role)
                assert got == mtype
            else:
                with pytest.raises(ProtocolError) as ei:
                    validate_client_message(msg, role)
                assert ei.value.code == "forbidden"
    assert set(VALID_BODIES) | {"join"} == set(CLIENT_TYPES)


def test_parse_and_join_errors():
    with pytest.raises(ProtocolError, match="type"):
        parse_message('{"no": "type"}')
    with pytest.raises(ProtocolError) as ei:
        parse_message("{broken")
    assert ei.value.code == "bad_json"
    assert validate_join({"type": "join", "role": "participant"}) \
        is Role.PARTICIPANT
    with pytest.raises(ProtocolError) as ei:
        validate_join({"type": "join", "role": "driver"})
    assert ei.value.code == "bad_role"
    with pytest.raises(ProtocolError) as ei:
        validate_client_message({"type": "join", "role": "participant"},
                                Role.PARTICIPANT)
    assert ei.value.code == "already_joined"


def test_bad_bodies_rejected():
    bad = [
        ({"type": "command", "cmd": "Teleport"}, Role.CO_WIZARD),
        ({"type": "command", "cmd": "SpeedChange", "speed": 7},
         Role.CO_WIZARD),
        ({"type": "chat", "text": ""}, Role.PARTICIPANT),
        ({"type": "mental", "mental": "GoalUpdate"}, Role.CO_WIZARD),
        ({"type": "env_exception", "exc": "WeatherChange",
          "weather": "hail"}, Role.AD_WIZARD),
        ({"type": "task_exception", "exc": "DeleteSubgoal", "target": 0,
          "prompt": ""}, Role.AD_WIZARD),
    ]
    for msg, role in bad:
        with pytest.raises(ProtocolError) as ei:
            validate_client_message(msg, role)
        assert ei.value.code == "bad_body"


def test_check_line_never_raises():
    assert check_line('{"type":"join","role":"ad_wizard"}', "x")["ok"]
    v = check_line("not json", "co_wizard")
    assert v == {"ok": False, "code": "bad_json", "detail": v["detail"]}
    v = check_line('{"type":"command","cmd":"Stop"}', "participant")
    assert not v["ok"] and v["code"] == "forbidden"
    v = check_line('{"type":"command","cmd":"Stop"}', "somebody")
    assert not v["ok"] and v["code"] == "bad_role"


def test_welcome_and_state(session1):
    w = welcome_message(session1, Role.PARTICIPANT)
    assert w["type"] == "welcome" and "map" not in w
    assert "story" in w["view"]
    w2 = welcome_message(session1, Role.CO_WIZARD)
    assert w2["map"] == "town1"
    # everyone gets the street geometry; landmark scoping is in the view
    assert w["map_geometry"]["lanes"] and w2["map_geometry"]["junctions"]
    st = state_message(session1)
    assert st["type"] == "state" and "vehicle" in st
    # the plan overlay is a co-wizard-only layer
    session1.submit(Role.CO_WIZARD, "command", {"cmd": "Start"})
    session1.step()
    assert "plan" not in state_message(session1, Role.PARTICIPANT)
    assert state_message(session1, Role.CO_WIZARD)["plan"]


def test_dispatch_queues_or_replies(session1):
    err = dispatch(session1, Role.PARTICIPANT, '{"type":"command",'
                   '"cmd":"Stop"}')
    assert err["type"] == "error" and err["code"] == "forbidden"
    assert dispatch(session1, Role.CO_WIZARD,
                    '{"type":"command","cmd":"Start"}') is None
    session1.step()
    assert session1.vehicle is not None  # queued command consumed cleanly


def test_route_filters_by_role():
    obs = [Outbound(Role.PARTICIPANT, "prompt", {"text": "hi"}),
           Outbound(None, "task_update", {"subgoals": []})]
    assert [m["type"] for m in route(obs, Role.PARTICIPANT)] == \
        ["prompt", "task_update"]
    assert [m["type"] for m in route(obs, Role.AD_WIZARD)] == ["task_update"]


def test_run_scripted_session_transcript():
    sess = build_session("town1", "t1", seed=7)
    script = [
        {"tick": 0, "role": "co_wizard", "type": "command", "cmd": "Start"},
        {"tick": 5, "role": "participant", "type": "chat",
         **make_utterance("HUM", "go north", 0.1,
                          [span(0, 8, "Instruct")])},
        {"tick": 10, "role": "participant", "type": "command",
         "cmd": "Stop"},
    ]
    transcript = run_scripted_session(sess, script, duration_ticks=30)
    assert sess.tick_count == 30
    chats = [(t, r, m) for t, r, m in transcript if m["type"] == "chat"]
    assert {r for _, r, m in chats} == {"co_wizard", "ad_wizard"}
    assert all(t == 5 for t, _, _ in chats)
    errs = [(t, r, m) for t, r, m in transcript if m["type"] == "error"]
    assert errs == [(10, "participant", errs[0][2])]
    assert errs[0][2]["code"] == "forbidden"


async def _ws_round_trip():
    import websockets
    sess = build_session("town1", "t1", seed=7)
    host = SessionHost(sess, tick_hz=300.0)
    async with websockets.serve(host.handler, "127.0.0.1", 0) as server:
        port = server.sockets[0].getsockname()[1]
        tick_task = asyncio.create_task(host.tick_loop())
        uri = f"ws://127.0.0.1:{port}"
        try:
            async with websockets.connect(uri) as ws:
                await ws.send(json.dumps({"type": "join",
                                          "role": "co_wizard"}))
                welcome = json.loads(await ws.recv())
                assert welcome["type"] == "welcome"
                assert welcome["role"] == "co_wizard"
                # second client on the same role is refused
                async with websockets.connect(uri) as ws2:
                    await ws2.send(json.dumps({"type": "join",
                                               "role": "co_wizard"}))
                    taken = json.loads(await ws2.recv())
                    assert taken["code"] == "role_taken"
                await ws.send(json.dumps({"type": "command",
                                          "cmd": "Start"}))
                # server streams state frames; wait for one
                for _ in range(50):
                    msg = json.loads(await asyncio.wait_for(ws.recv(), 5))
                    if msg["type"] == "state":
                        break
                assert msg["type"] == "state"
                # a protocol violation gets an error reply
                await ws.send(json.dumps({"type": "env_exception",
                                          "exc": "WeatherChange",
                                          "weather": "rain"}))
                for _ in range(200):
                    msg = json.loads(await asyncio.wait_for(ws.recv(), 5))
                    if msg["type"] == "error":
                        break
                assert msg["code"] == "forbidden"
        finally:
            host.stop()
            await tick_task


def test_live_websocket_round_trip():
    asyncio.run(_ws_round_trip())
