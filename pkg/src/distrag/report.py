"""CSV/JSON report emission for evaluation runs and sparsity sweeps."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from distrag.evaluator import AblationReport, HISTOGRAM_EDGES, RunReport, bin_index, histogram_labels

RESULTS_HEADER = ["pipeline", "difficulty", "mse", "abstains", "total_latency_ms"]
RESIDUALS_HEADER = ["pipeline", "question_id", "y", "y_hat", "error", "bin"]
HISTOGRAM_HEADER = ["pipeline", "difficulty", "bin", "lower_km", "upper_km", "count"]
ABLATION_HEADER = ["pipeline", "level", "difficulty", "response_rate"]


def format_sci(x: Optional[float]) -> str:
    """Three significant digits, e.g. ``1.01e5``, ``0.00e0``; ``-`` when absent."""
    if x is None:
        return "-"
    mantissa, exp = f"{x:.2e}".split("e")
    return f"{mantissa}e{int(exp)}"


def _num(x) -> str:
    if x is None:
        return ""
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


@dataclass
class EvaluationReport:
    runs: list = field(default_factory=list)
    ablations: list = field(default_factory=list)


def _as_report(report) -> EvaluationReport:
    if isinstance(report, EvaluationReport):
        return report
    if isinstance(report, RunReport):
        return EvaluationReport(runs=[report])
    if isinstance(report, AblationReport):
        return EvaluationReport(ablations=[report])
    raise TypeError(f"cannot emit {type(report).__name__}")


def _run_json(run: RunReport) -> dict:
    labels = histogram_labels()
    return {
        "pipeline": run.pipeline,
        "difficulty": run.difficulty,
        "n": run.n,
        "mse": run.mse,
        "mse_display": format_sci(run.mse),
        "abstains": run.abstain_count,
        "total_latency_ms": round(run.total_latency_s * 1000.0, 3),
        "histogram": dict(zip(labels, run.histogram)),
        "residuals": [
            {
                "question_id": r.question_id,
                "difficulty": r.difficulty.value,
                "y": r.y,
                "y_hat": r.y_hat,
                "error": r.error,
                "bin": labels[bin_index(r)],
                "reason": r.reason,
            }
            for r in run.residuals
        ],
    }


def _write_csv(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def emit_report(report, out_dir) -> list[Path]:
    """Write results/residuals/histogram/ablation CSVs plus report.json."""
    rep = _as_report(report)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    labels = histogram_labels()

    parts = [part for run in rep.runs for part in run.split_by_difficulty()]
    results = [
        [p.pipeline, p.difficulty, format_sci(p.mse), p.abstain_count, f"{p.total_latency_s * 1000.0:.3f}"]
        for p in parts
    ]
    residuals = [
        [run.pipeline, r.question_id, _num(r.y), _num(r.y_hat), _num(r.error), labels[bin_index(r)]]
        for run in rep.runs
        for r in run.residuals
    ]
    hist = []
    for p in parts:
        for i, count in enumerate(p.histogram):
            lo = HISTOGRAM_EDGES[i]
            hi = HISTOGRAM_EDGES[i + 1] if i + 1 < len(HISTOGRAM_EDGES) else ""
            hist.append([p.pipeline, p.difficulty, labels[i], lo, hi, count])
    ablation = [
        [a.pipeline, f"{row.level:g}", row.difficulty, repr(row.response_rate)]
        for a in rep.ablations
        for row in a.rows
    ]

    paths = {
        "results.csv": (RESULTS_HEADER, results),
        "residuals.csv": (RESIDUALS_HEADER, residuals),
        "histogram.csv": (HISTOGRAM_HEADER, hist),
        "ablation.csv": (ABLATION_HEADER, ablation),
    }
    written = []
    for name, (header, rows) in paths.items():
        _write_csv(out / name, header, rows)
        written.append(out / name)

    doc = {
        "results": [_run_json(p) for p in parts],
        "ablation": [
            {
                "pipeline": a.pipeline,
                "rows": [
                    {"level": row.level, "difficulty": row.difficulty, "response_rate": row.response_rate,
                     "answered": row.answered, "total": row.total}
                    for row in a.rows
                ],
                "runs": {f"{level:g}": _run_json(run) for level, run in a.runs.items()},
            }
            for a in rep.ablations
        ],
    }
    (out / "report.json").write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    written.append(out / "report.json")
    return written
