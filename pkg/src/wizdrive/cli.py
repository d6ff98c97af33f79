"""Command line front end."""

from __future__ import annotations

import json
import os
import sys

import click

from . import evaluation, report as report_mod, session_log
from .autopilot import generate_script
from .dialogue import DialogueOntology
from .protocol import check_line
from .server import build_session, load_script, run_scripted_session
from .session import REPLAY_EVERY_TICKS, replay_jsonl
from .session_log import SessionLog, TICKS_PER_SECOND


_TASK_NAMES = {"ufn": "UfN", "rfn": "RfN", "nfd": "NfD"}


@click.group()
def main():
    """Duo-wizard driving/dialogue platform tools."""


def _session_options(f):
    f = click.option("--map", "map_ref", default="town1",
                     show_default=True, help="packaged town id")(f)
    f = click.option("--template", "template_ref", default="t1",
                     show_default=True, help="packaged storyboard id")(f)
    f = click.option("--map-file", type=click.Path(exists=True),
                     default=None, help="map JSON overriding --map")(f)
    f = click.option("--template-file", type=click.Path(exists=True),
                     default=None, help="template JSON overriding "
                     "--template")(f)
    f = click.option("--seed", type=int, default=7, show_default=True)(f)
    return f


@main.command()
@_session_options
@click.option("--script", "script_path", type=click.Path(exists=True),
              required=True, help="session script JSON")
@click.option("--ticks", type=int, default=None,
              help="tick budget (default: last script tick + 1 s)")
@click.option("--out", "out_path", type=click.Path(), required=True)
def record(map_ref, template_ref, map_file, template_file, seed,
           script_path, ticks, out_path):
    """Run a scripted session headless and persist its log."""
    sess = build_session(map_ref, template_ref, seed,
                         map_path=map_file, template_path=template_file)
    script = load_script(script_path)
    if ticks is None:
        last = max((int(e["tick"]) for e in script), default=0)
        ticks = last + TICKS_PER_SECOND
    run_scripted_session(sess, script, ticks)
    sess.log.save(out_path, fsync=True)
    click.echo(f"{out_path}: {len(sess.log.events)} events, "
               f"{sess.tick_count} ticks")


@main.command("script")
@click.argument("action", type=click.Choice(["run"]))
@click.argument("script_path", type=click.Path(exists=True))
@_session_options
@click.option("--ticks", type=int, default=None)
@click.option("--out", "out_path", type=click.Path(), default=None)
def script_cmd(action, script_path, map_ref, template_ref, map_file,
               template_file, seed, ticks, out_path):
    """Run a session script; print the outbound transcript."""
    sess = build_session(map_ref, template_ref, seed,
                         map_path=map_file, template_path=template_file)
    script = load_script(script_path)
    if ticks is None:
        last = max((int(e["tick"]) for e in script), default=0)
        ticks = last + TICKS_PER_SECOND
    transcript = run_scripted_session(sess, script, ticks)
    for tick, role, msg in transcript:
        click.echo(f"{tick}\t{role or '*'}\t{session_log.canonical_json(msg)}")
    if out_path:
        sess.log.save(out_path, fsync=True)


@main.command()
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--fps", type=int, default=10, show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def replay(log_path, fps, out_path):
    """Re-simulate a recorded session into 10 FPS frames."""
    if fps != TICKS_PER_SECOND // REPLAY_EVERY_TICKS:
        raise click.BadParameter("replay is fixed at 10 FPS")
    log = SessionLog.load(log_path)
    text = replay_jsonl(log)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    click.echo(f"{out_path}: {len(text.splitlines())} frames")


@main.command()
@click.argument("log_path", type=click.Path(exists=True))
def validate(log_path):
    """Structural log check; non-zero exit on findings."""
    rep = session_log.validate(SessionLog.load(log_path))
    click.echo(json.dumps(rep, indent=2))
    if rep["findings"]:
        raise SystemExit(1)


@main.command()
@click.argument("log_path", type=click.Path(exists=True))
@click.option("--split", is_flag=True,
              help="write interaction/world logs separately")
@click.option("--out-dir", type=click.Path(), default=".",
              show_default=True)
def export(log_path, split, out_dir):
    """Export a log, optionally split into the two-file layout."""
    log = SessionLog.load(log_path)
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.splitext(os.path.basename(log_path))[0]
    if split:
        inter, world = session_log.export_split(log)
        for suffix, text in (("interaction", inter), ("world", world)):
            path = os.path.join(out_dir, f"{base}.{suffix}.jsonl")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
            click.echo(path)
    else:
        path = os.path.join(out_dir, f"{base}.export.jsonl")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(log.to_jsonl())
        click.echo(path)


@main.group("eval")
def eval_group():
    """Teacher-forcing evaluation tools."""


@eval_group.command("extract")
@click.option("--task", type=click.Choice(["ufn", "rfn", "nfd"]),
              required=True)
@click.argument("log_paths", type=click.Path(exists=True), nargs=-1,
                required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def eval_extract(task, log_paths, out_path):
    """Extract teacher-forcing examples from session logs."""
    logs = [(os.path.splitext(os.path.basename(p))[0], SessionLog.load(p))
            for p in log_paths]
    examples, rep = evaluation.extract(_TASK_NAMES[task], logs)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(evaluation.examples_jsonl(examples))
    for line in rep:
        click.echo(f"skip: {line}", err=True)
    click.echo(f"{out_path}: {len(examples)} examples")


@eval_group.command("score")
@click.option("--task", type=click.Choice(["ufn", "rfn", "nfd"]),
              required=True)
@click.option("--pred", "pred_path", type=click.Path(exists=True),
              required=True)
@click.option("--gold", "gold_path", type=click.Path(exists=True),
              required=True, help="examples file from `eval extract`")
@click.option("--tol", type=float, default=15.0, show_default=True)
@click.option("--macro", is_flag=True, help="macro-average the slot F1")
def eval_score(task, pred_path, gold_path, tol, macro):
    """Score aligned predictions against extracted golds."""
    golds, preds = {}, {}
    with open(gold_path, encoding="utf-8") as fh:
        for ln in fh:
            if ln.strip():
                rec = json.loads(ln)
                golds[rec["id"]] = rec["gold"]
    with open(pred_path, encoding="utf-8") as fh:
        for ln in fh:
            if ln.strip():
                rec = json.loads(ln)
                preds[rec["id"]] = rec.get("pred", {
                    k: v for k, v in rec.items() if k != "id"})
    missing = sorted(set(golds) - set(preds))
    if missing:
        raise click.ClickException(
            f"{len(missing)} examples lack predictions "
            f"(first: {missing[0]})")
    ids = sorted(golds)
    result = evaluation.score(_TASK_NAMES[task], [preds[i] for i in ids],
                              [golds[i] for i in ids], tol=tol,
                              macro=macro)
    click.echo(json.dumps(result, indent=2))


@main.command()
@click.argument("log_paths", type=click.Path(exists=True), nargs=-1,
                required=True)
@click.option("--out-dir", type=click.Path(), default="report",
              show_default=True)
def report(log_paths, out_dir):
    """Per-EU behavior statistics: CSV table plus rendered figures."""
    logs = [SessionLog.load(p) for p in log_paths]
    stats = report_mod.corpus_stats(logs)
    for path in report_mod.write_report(stats, out_dir):
        click.echo(path)


@main.command()
@_session_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8765, show_default=True)
def serve(map_ref, template_ref, map_file, template_file, seed, host, port):
    """Host a live websocket session."""
    import asyncio

    from .server import serve as serve_async
    sess = build_session(map_ref, template_ref, seed,
                         map_path=map_file, template_path=template_file)
    click.echo(f"session on ws://{host}:{port} "
               f"(map {sess.town.town_id}, seed {seed})")
    asyncio.run(serve_async(sess, host, port))


@main.command()
@_session_options
@click.option("--no-inject", is_flag=True,
              help="skip the roadblock/delete exceptions")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="script JSON output")
@click.option("--log", "log_path", type=click.Path(), default=None,
              help="also save the generated session log")
def autopilot(map_ref, template_ref, map_file, template_file, seed,
              no_inject, out_path, log_path):
    """Generate a storyboard-completing co-wizard script."""
    sess = build_session(map_ref, template_ref, seed,
                         map_path=map_file, template_path=template_file)
    script = generate_script(sess, inject=not no_inject)
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump({"script": script}, fh, indent=1)
    if log_path:
        sess.log.save(log_path, fsync=True)
    click.echo(f"{out_path}: {len(script)} entries, "
               f"{sess.tick_count} ticks")


@main.command("protocol-check")
@click.option("--role", type=click.Choice(
    ["participant", "co_wizard", "ad_wizard"]), required=True)
def protocol_check(role):
    """Validate JSON messages from stdin, one verdict line each."""
    for raw in sys.stdin:
        if not raw.strip():
            continue
        click.echo(session_log.canonical_json(check_line(raw, role)))


@main.command()
def ontology():
    """Print the dialogue ontology."""
    ont = DialogueOntology.load()
    click.echo(json.dumps({"moves": list(ont.moves),
                           "slots": {k: list(v)
                                     for k, v in ont.slots.items()}},
                          indent=2))


if __name__ == "__main__":
    main()
