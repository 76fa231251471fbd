"""Aggregation into taxonomy-group summaries and report emission.

Outputs per run, all byte-deterministic for a given result:
  results.json   every metric field, config echo, scorer info, failures
  scores/<dataset>.csv   per-clip (entry_id, score, label), exact floats
  plot_data.csv  (dataset_id, accuracy, below_median) bar-chart feed
  table.tex      one LaTeX tabular, one row per dataset
"""

from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .errors import EmptyGroupError, ReportIOError
from .metrics import MetricsReport
from .registry import DatasetDescriptor, select_group
from .scorer import ScorerInfo

ClipScore = tuple[str, float, str]  # entry_id, score, label


@dataclass(frozen=True)
class GroupSummary:
    group_name: str
    member_dataset_ids: tuple[str, ...]
    excluded_dataset_ids: tuple[str, ...]
    mean_accuracy: float
    median_accuracy: float
    per_dataset: dict

    def to_dict(self) -> dict:
        return {
            "group_name": self.group_name,
            "member_dataset_ids": list(self.member_dataset_ids),
            "excluded_dataset_ids": list(self.excluded_dataset_ids),
            "mean_accuracy": self.mean_accuracy,
            "median_accuracy": self.median_accuracy,
            "per_dataset": {
                dataset_id: report.to_dict()
                for dataset_id, report in sorted(self.per_dataset.items())
            },
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "GroupSummary":
        return cls(
            group_name=payload["group_name"],
            member_dataset_ids=tuple(payload["member_dataset_ids"]),
            excluded_dataset_ids=tuple(payload["excluded_dataset_ids"]),
            mean_accuracy=payload["mean_accuracy"],
            median_accuracy=payload["median_accuracy"],
            per_dataset={
                dataset_id: MetricsReport.from_dict(raw)
                for dataset_id, raw in payload["per_dataset"].items()
            },
        )


@dataclass
class RunResult:
    run_id: str
    config_hash: str
    config_echo: dict
    scorer_info: ScorerInfo
    summaries: list[GroupSummary]
    failures: list[tuple[str, str]]
    dataset_scores: dict = field(default_factory=dict)  # dataset_id -> [ClipScore]


def aggregate(
    reports: dict,
    registry: Sequence[DatasetDescriptor],
    groups: Iterable[str],
) -> list[GroupSummary]:
    """Summarize per-dataset reports over taxonomy groups.

    Group membership is the registry selection restricted to evaluated
    datasets, minus datasets whose group_exclusions name the group. Mean and
    median are unweighted over member accuracies.
    """
    known = {d.id for d in registry}
    unknown = set(reports) - known
    if unknown:
        raise ValueError(f"reports reference datasets missing from registry: {sorted(unknown)}")
    summaries = []
    for group_name in groups:
        selected = select_group(group_name, registry)
        members = [
            d.id for d in selected
            if d.id in reports and group_name not in d.group_exclusions
        ]
        excluded = [
            d.id for d in selected
            if d.id in reports and group_name in d.group_exclusions
        ]
        if not members:
            raise EmptyGroupError(
                f"group {group_name!r} has no member datasets after exclusions"
            )
        accuracies = [reports[m].accuracy for m in members]
        summaries.append(
            GroupSummary(
                group_name=group_name,
                member_dataset_ids=tuple(members),
                excluded_dataset_ids=tuple(excluded),
                mean_accuracy=float(statistics.fmean(accuracies)),
                median_accuracy=float(statistics.median(accuracies)),
                per_dataset={m: reports[m] for m in members},
            )
        )
    return summaries


def _latex_escape(text: str) -> str:
    return text.replace("_", r"\_")


def _fmt(value: Optional[float]) -> str:
    return "--" if value is None else f"{value:.4f}"


def _all_reports(result: RunResult) -> dict:
    for summary in result.summaries:
        if summary.group_name == "all":
            return dict(summary.per_dataset)
    merged: dict = {}
    for summary in result.summaries:
        merged.update(summary.per_dataset)
    return merged


def emit_latex(result: RunResult) -> str:
    """Render one tabular with a row per dataset; absent metrics become --."""
    reports = _all_reports(result)
    lines = [
        r"\begin{tabular}{lrrrrrr}",
        r"\hline",
        r"Dataset & N & EER & AUC & Accuracy & TPR & TNR \\",
        r"\hline",
    ]
    for dataset_id in sorted(reports):
        r = reports[dataset_id]
        n = r.n_bonafide + r.n_spoof
        lines.append(
            f"{_latex_escape(dataset_id)} & {n} & {_fmt(r.eer)} & {_fmt(r.auc)}"
            f" & {_fmt(r.accuracy)} & {_fmt(r.tpr)} & {_fmt(r.tnr)} \\\\"
        )
    lines += [r"\hline", r"\end{tabular}", ""]
    return "\n".join(lines)


def _plot_rows(result: RunResult) -> list[tuple[str, float, bool]]:
    reports = _all_reports(result)
    for summary in result.summaries:
        if summary.group_name == "all":
            median = summary.median_accuracy
            break
    else:
        median = float(statistics.median(r.accuracy for r in reports.values()))
    return [
        (dataset_id, reports[dataset_id].accuracy, reports[dataset_id].accuracy < median)
        for dataset_id in sorted(reports)
    ]


def results_payload(result: RunResult) -> dict:
    """The persisted results document (run_id deliberately excluded so that
    identical runs serialize to identical bytes)."""
    info = result.scorer_info
    return {
        "config_hash": result.config_hash,
        "config_echo": result.config_echo,
        "scorer_info": {
            "name": info.name,
            "protocol_version": info.protocol_version,
            "expected_sample_rate_hz": info.expected_sample_rate_hz,
            "expected_length_samples": info.expected_length_samples,
        },
        "summaries": [s.to_dict() for s in result.summaries],
        "failures": [list(f) for f in sorted(result.failures)],
    }


def emit_results(
    result: RunResult,
    out_dir: Union[str, Path],
    latex_path: Optional[Union[str, Path]] = None,
) -> dict:
    """Write results.json, per-dataset score files, plot data, and LaTeX.

    Returns {logical name: Path} of everything written.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = {}

        results_file = out_dir / "results.json"
        results_file.write_text(
            json.dumps(results_payload(result), indent=2) + "\n", encoding="utf-8"
        )
        written["results"] = results_file

        scores_dir = out_dir / "scores"
        scores_dir.mkdir(exist_ok=True)
        # drop score files from earlier runs into the same directory so the
        # persisted set always mirrors this result exactly
        current = {f"{dataset_id}.csv" for dataset_id in result.dataset_scores}
        for stale in scores_dir.glob("*.csv"):
            if stale.name not in current:
                stale.unlink()
        for dataset_id in sorted(result.dataset_scores):
            score_file = scores_dir / f"{dataset_id}.csv"
            with score_file.open("w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["entry_id", "score", "label"])
                for entry_id, score, label in result.dataset_scores[dataset_id]:
                    writer.writerow([entry_id, repr(float(score)), label])
            written[f"scores/{dataset_id}"] = score_file

        plot_file = out_dir / "plot_data.csv"
        with plot_file.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(["dataset_id", "accuracy", "below_median"])
            for dataset_id, accuracy, below in _plot_rows(result):
                writer.writerow([dataset_id, repr(float(accuracy)), str(below).lower()])
        written["plot_data"] = plot_file

        latex_file = Path(latex_path) if latex_path else out_dir / "table.tex"
        latex_file.parent.mkdir(parents=True, exist_ok=True)
        latex_file.write_text(emit_latex(result), encoding="utf-8")
        written["latex"] = latex_file
        return written
    except OSError as exc:
        raise ReportIOError(f"could not write run outputs under {out_dir}: {exc}") from exc


def load_results(path: Union[str, Path]) -> RunResult:
    """Reload a persisted results.json into a RunResult (scores not included)."""
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    info = payload["scorer_info"]
    return RunResult(
        run_id=payload["config_hash"],
        config_hash=payload["config_hash"],
        config_echo=payload["config_echo"],
        scorer_info=ScorerInfo(
            name=info["name"],
            protocol_version=info["protocol_version"],
            expected_sample_rate_hz=info["expected_sample_rate_hz"],
            expected_length_samples=info["expected_length_samples"],
        ),
        summaries=[GroupSummary.from_dict(s) for s in payload["summaries"]],
        failures=[tuple(f) for f in payload["failures"]],
    )


def load_score_file(path: Union[str, Path]) -> list[ClipScore]:
    rows = []
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["entry_id", "score", "label"]:
            raise ReportIOError(f"{path}: bad score file header {header}")
        for entry_id, score, label in reader:
            rows.append((entry_id, float(score), label))
    return rows
