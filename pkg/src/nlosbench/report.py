"""Table-I-shaped summaries: one row per scenario, NB/SVM column pairs per metric."""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable, TextIO

from .evaluation import METRICS, MODEL_KINDS, CvReport, NotDefined

SCENARIO_ORDER = ("highway", "suburban", "urban")
_TITLES = {"accuracy": "Accuracy", "precision": "Precision", "recall": "Recall", "fpr": "FPR"}


def table_rows(reports: Iterable[CvReport]) -> list[dict]:
    """Mean metrics keyed ``<metric>_<model>`` for each scenario present."""
    by_scenario: dict[str, dict] = {}
    for r in reports:
        row = by_scenario.setdefault(r.scenario, {"scenario": r.scenario})
        for m in METRICS:
            row[f"{m}_{r.model_kind}"] = r.mean(m)
    order = {s: i for i, s in enumerate(SCENARIO_ORDER)}
    return sorted(by_scenario.values(), key=lambda row: (order.get(row["scenario"], 99), row["scenario"]))


def columns() -> list[str]:
    return [f"{m}_{k}" for m in METRICS for k in MODEL_KINDS]


def _cell(v, fmt: str = "{:.4f}") -> str:
    if v is None:
        return "-"
    if v is NotDefined:
        return "NotDefined"
    return fmt.format(v)


def render_table(rows: list[dict]) -> str:
    head1 = f"{'Scenario':<10}" + "".join(f"{_TITLES[m]:^22}" for m in METRICS)
    head2 = f"{'':<10}" + "".join(f"{'NB':>10}{'SVM':>10}  " for _ in METRICS)
    lines = [head1, head2, "-" * len(head1)]
    for row in rows:
        cells = "".join(
            f"{_cell(row.get(f'{m}_nb')):>10}{_cell(row.get(f'{m}_svm')):>10}  " for m in METRICS
        )
        lines.append(f"{row['scenario'].capitalize():<10}{cells}")
    return "\n".join(lines) + "\n"


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = columns()
    w.writerow(["scenario", *cols])
    for row in rows:
        w.writerow([row["scenario"], *(_cell(row.get(c), "{!r}") for c in cols)])
    return buf.getvalue()


def render_json(rows: list[dict]) -> str:
    def enc(v):
        return "NotDefined" if v is NotDefined else v

    return json.dumps([{k: enc(v) for k, v in row.items()} for row in rows], indent=2) + "\n"


def parse_csv(stream: TextIO) -> list[dict]:
    rows = []
    for rec in csv.DictReader(stream):
        row = {"scenario": rec.pop("scenario")}
        for k, v in rec.items():
            row[k] = None if v == "-" else NotDefined if v == "NotDefined" else float(v)
        rows.append(row)
    return rows


def render(rows: list[dict], fmt: str) -> str:
    return {"table": render_table, "csv": render_csv, "json": render_json}[fmt](rows)
