import json

import pytest

from wizdrive.session import Session, packaged_map, packaged_template

TOWN_IDS = ("town1", "town2", "town3", "town5")


@pytest.fixture(scope="session")
def towns():
    return {tid: packaged_map(tid) for tid in TOWN_IDS}


@pytest.fixture(scope="session")
def town1(towns):
    return towns["town1"]


@pytest.fixture(scope="session")
def template1():
    return packaged_template("t1")


@pytest.fixture()
def session1(town1, template1):
    return Session(town1, template1, seed=7, town_ref="town1",
                   template_ref="t1")


def make_utterance(speaker, text, t, spans, eu_id=""):
    """Wire-format utterance payload for synthetic logs."""
    return {"speaker": speaker, "text": text, "t_start": t, "t_end": t,
            "spans": spans, "eu_id": eu_id, "tu_id": ""}


def span(start, end, move, slots=()):
    return {"start": start, "end": end, "move": move,
            "slots": [list(p) for p in slots]}


def raw_map_doc(town_id):
    from importlib import resources
    text = resources.files("wizdrive.data.maps").joinpath(
        f"{town_id}.json").read_text()
    return json.loads(text)


_CRITERIA = {}


def pytest_collection_modifyitems(items):
    for item in items:
        name = getattr(getattr(item, "function", None), "_criterion", None)
        if name is not None:
            _CRITERIA[item.nodeid] = name


def pytest_terminal_summary(terminalreporter):
    # one verdict line per acceptance criterion, immune to stdout capture
    verdicts = {}
    for rep in terminalreporter.stats.get("passed", ()):
        if rep.when == "call" and rep.nodeid in _CRITERIA:
            verdicts[rep.nodeid] = "PASS"
    for key in ("failed", "error"):
        for rep in terminalreporter.stats.get(key, ()):
            if rep.nodeid in _CRITERIA:
                verdicts[rep.nodeid] = "FAIL"
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid in sorted(verdicts):
        terminalreporter.write_line(
            f"[PRIMARY] {_CRITERIA[nodeid]}: {verdicts[nodeid]}")
