import csv
import io

from conftest import make_utterance, span
from wizdrive.report import corpus_stats, session_eus, stats_csv, write_report
from wizdrive.session_log import EventKind, LogEvent, SessionLog


def _corpus_log():
    log = SessionLog({"format": 1, "map": "town1", "template": "t1",
                      "seed": 7})
    log.append(LogEvent(0, 0, EventKind.ENV_EXCEPTION,
                        {"exc": "WeatherChange", "weather": "rain"}))
    log.append(LogEvent(1, 30, EventKind.UTTERANCE,
                        make_utterance("BOT", "it is raining now", 1.0,
                                       [span(0, 8, "Explain"),
                                        span(8, 17, "Inform",
                                             [("Status", "Blocked")])],
                                       eu_id="e1")))
    log.append(LogEvent(2, 90000, EventKind.UTTERANCE,
                        make_utterance("HUM", "where are we", 3000.0,
                                       [span(0, 12, "Ask")], eu_id="e2")))
    return log


def test_session_eus_attribution():
    eus = session_eus(_corpus_log())
    assert [(eu.eu_id, eu.handled_exception) for eu in eus] == \
        [("e1", "Env"), ("e2", "None")]


def test_stats_csv_content():
    stats = corpus_stats([_corpus_log()])
    rows = list(csv.reader(io.StringIO(stats_csv(stats))))
    assert rows[0] == ["table", "category", "speaker", "name", "value"]
    by_key = {tuple(r[:4]): r[4] for r in rows[1:]}
    assert by_key[("eu_count", "Env", "", "")] == "1"
    assert by_key[("eu_count", "None", "", "")] == "1"
    assert by_key[("moves", "Env", "BOT", "Explain")] == "1.000000"
    assert by_key[("moves", "Env", "BOT", "Inform")] == "1.000000"
    assert by_key[("moves", "None", "HUM", "Ask")] == "1.000000"
    assert by_key[("slots", "Env", "BOT", "Status")] == "1.000000"
    assert by_key[("moves", "Task", "BOT", "Explain")] == "0.000000"


def test_write_report_outputs(tmp_path):
    stats = corpus_stats([_corpus_log()])
    written = write_report(stats, tmp_path)
    names = sorted(p.split("/")[-1] for p in written)
    assert names == ["eu_stats.csv", "moves_per_eu.png", "slots_per_eu.png"]
    for p in written:
        assert (tmp_path / p.split("/")[-1]).stat().st_size > 0
    with open(written[0], encoding="utf-8") as fh:
        assert fh.readline().startswith("table,")
    # PNG magic bytes on the figures
    for p in written[1:]:
        with open(p, "rb") as fh:
            assert fh.read(8) == b"\x89PNG\r\n\x1a\n"
