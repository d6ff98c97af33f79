"""Behavior statistics report: per-EU move/slot averages as delimited
output plus rendered figures."""

from __future__ import annotations

import csv
import io
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .dialogue import UtteranceEvent, collect_eus, eu_stats
from .session_log import EventKind, SessionLog

CATEGORIES = ("Env", "Task", "None")
SPEAKERS = ("HUM", "BOT")


def session_eus(log: SessionLog):
    utterances = [UtteranceEvent.from_wire(e.payload)
                  for e in log.events_of(EventKind.UTTERANCE)]
    exc_times = [(e.t, "Env") for e in log.events_of(EventKind.ENV_EXCEPTION)]
    exc_times += [(e.t, "Task")
                  for e in log.events_of(EventKind.TASK_EXCEPTION)]
    return collect_eus(utterances, exc_times)


def corpus_stats(logs) -> dict:
    return eu_stats([session_eus(log) for log in logs])


def stats_csv(stats: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["table", "category", "speaker", "name", "value"])
    for cat in CATEGORIES:
        w.writerow(["eu_count", cat, "", "", stats["eu_counts"][cat]])
    for table in ("moves", "slots"):
        for (cat, speaker, name), mean in sorted(stats[table].items()):
            w.writerow([table, cat, speaker, name, f"{mean:.6f}"])
    return buf.getvalue()


def _bar_figure(rows: dict, title: str, path: str) -> None:
    names = sorted({name for (_, _, name) in rows})
    fig, axes = plt.subplots(1, len(CATEGORIES), figsize=(12, 4),
                             sharey=True)
    x = range(len(names))
    for ax, cat in zip(axes, CATEGORIES):
        for off, speaker in zip((-0.2, 0.2), SPEAKERS):
            vals = [rows.get((cat, speaker, n), 0.0) for n in names]
            ax.bar([i + off for i in x], vals, width=0.4, label=speaker)
        ax.set_title(cat)
        ax.set_xticks(list(x))
        ax.set_xticklabels(names, rotation=90, fontsize=7)
    axes[0].set_ylabel("mean per EU")
    axes[0].legend()
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(stats: dict, out_dir) -> list[str]:
    """Write eu_stats.csv plus one figure per table; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    csv_path = os.path.join(out_dir, "eu_stats.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(stats_csv(stats))
    written.append(csv_path)
    for table, title in (("moves", "Dialogue moves per exchange unit"),
                         ("slots", "Slots per exchange unit")):
        if not stats[table]:
            continue
        path = os.path.join(out_dir, f"{table}_per_eu.png")
        _bar_figure(stats[table], title, path)
        written.append(path)
    return written
