"""Orchestration: wiring registry, manifests, audio, scorer, metrics, report.

The runner owns all mutable run state. Clips are preprocessed by a bounded
worker pool in manifest order; scoring requests are serialized to one scorer
instance. Unreadable clips are skipped and counted; dataset-level failures
are recorded and the run continues unless fail_fast is set.
"""

from __future__ import annotations

import datetime
import json
import logging
import os
import statistics
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from .audio import decode, preprocess
from .config import EvalConfig
from .errors import AuddtError, ConfigError, ScorerError, ScorerStartError
from .manifest import ADAPTERS, ManifestEntry, normalize_labels, read_manifest, write_manifest
from .metrics import LabeledScores, compute_report
from .registry import DatasetDescriptor, default_registry, load_registry, select_group
from .report import (
    GroupSummary,
    RunResult,
    aggregate,
    emit_results,
    load_results,
    load_score_file,
)
from .scorer import ExternalScorer, builtin_scorer

log = logging.getLogger(__name__)

DATA_ROOT_ENV = "AUDDT_DATA_ROOT"


def registry_for(config: EvalConfig) -> list[DatasetDescriptor]:
    if config.data.registry_path is not None:
        return load_registry(config.data.registry_path)
    return default_registry()


def data_root_for(config: EvalConfig) -> Path:
    override = os.environ.get(DATA_ROOT_ENV)
    return Path(override) if override else Path(config.data.manifest_path)


def build_scorer(config: EvalConfig):
    """Instantiate the scorer named by the config (builtin or external).

    In external mode, scorer_args may carry handshake_timeout_s and
    request_timeout_s to override the protocol client's timeouts.
    """
    if config.scorer.startswith("builtin:"):
        kind = config.scorer.split(":", 1)[1]
        return builtin_scorer(kind, **config.scorer_args)
    command = list(config.scorer_command)
    model = config.model
    if model is not None:
        command += ["--wrapper", model.wrapper_path, "--class", model.class_name]
        if model.checkpoint is not None:
            command += ["--checkpoint", model.checkpoint]
        command += ["--device", model.device]
        if model.model_args:
            command += ["--model-args", json.dumps(model.model_args, sort_keys=True)]
    timeouts = {}
    for key in ("handshake_timeout_s", "request_timeout_s"):
        if key in config.scorer_args:
            timeouts[key] = float(config.scorer_args[key])
    return ExternalScorer(command, **timeouts)


def _selected_datasets(
    config: EvalConfig, registry: Sequence[DatasetDescriptor]
) -> list[tuple[str, Path, Path]]:
    """(dataset_id, dataset_root, manifest_path) triples for this run."""
    root = data_root_for(config)
    if root.is_file():
        entries = read_manifest(root)
        if not entries:
            raise ConfigError(f"manifest {root} is empty")
        dataset_ids = {e.dataset_id for e in entries}
        if len(dataset_ids) != 1:
            raise ConfigError(f"manifest {root} mixes datasets {sorted(dataset_ids)}")
        return [(dataset_ids.pop(), root.parent, root)]
    selected = select_group(config.data.group_name, registry)
    if not selected:
        raise ConfigError(f"group {config.data.group_name!r} selected zero datasets")
    return [(d.id, root / d.id, root / d.id / "manifest.csv") for d in selected]


def _preprocess_entry(entry: ManifestEntry, dataset_root: Path,
                      rate: int, length: int):
    try:
        buf = decode(entry.resolve(dataset_root).read_bytes())
        return entry, preprocess(buf, rate, length)
    except (OSError, AuddtError) as exc:
        log.warning("skipping %s/%s: %s", entry.dataset_id, entry.relative_path, exc)
        return entry, None


def _score_dataset(scorer, config: EvalConfig, entries, dataset_root: Path):
    """Preprocess (parallel, order-preserving) then score (serialized)."""
    rate = config.data.target_sample_rate
    length = config.data.target_length
    with ThreadPoolExecutor(max_workers=config.evaluation.num_workers) as pool:
        prepared = list(
            pool.map(
                lambda e: _preprocess_entry(e, dataset_root, rate, length), entries
            )
        )
    skipped = sum(1 for _, buf in prepared if buf is None)
    usable = [(entry, buf) for entry, buf in prepared if buf is not None]
    records = []
    batch_size = config.evaluation.batch_size
    for start in range(0, len(usable), batch_size):
        chunk = usable[start:start + batch_size]
        records.extend(scorer.score_batch([(e.entry_id, buf) for e, buf in chunk]))
    labels = [entry.label for entry, _ in usable]
    return records, labels, skipped


def _adhoc_all_summary(reports: dict) -> GroupSummary:
    accuracies = [reports[d].accuracy for d in sorted(reports)]
    return GroupSummary(
        group_name="all",
        member_dataset_ids=tuple(sorted(reports)),
        excluded_dataset_ids=(),
        mean_accuracy=float(statistics.fmean(accuracies)),
        median_accuracy=float(statistics.median(accuracies)),
        per_dataset={d: reports[d] for d in sorted(reports)},
    )


def _summarize(reports: dict, registry, group_name: str) -> list[GroupSummary]:
    known = {d.id for d in registry}
    if not set(reports) <= known:
        # single-manifest runs may evaluate a dataset the registry has never
        # heard of; summarize it standalone
        return [_adhoc_all_summary(reports)]
    groups = ["all"]
    if group_name != "all":
        groups.append(group_name)
    return aggregate(reports, registry, groups)


def _group_for_summaries(config: EvalConfig) -> str:
    # a manifest-file selection is its own universe: the configured group
    # name played no part in selecting it, so summaries reduce to "all"
    if data_root_for(config).is_file():
        return "all"
    return config.data.group_name


def run_evaluation(config: EvalConfig, scorer=None) -> RunResult:
    """Evaluate the configured dataset selection and emit all outputs."""
    registry = registry_for(config)
    datasets = _selected_datasets(config, registry)

    owns_scorer = scorer is None
    if owns_scorer:
        scorer = build_scorer(config)
    try:
        try:
            scorer_info = scorer.info()
        except (ScorerError, OSError) as exc:
            raise ScorerStartError(f"scorer handshake failed: {exc}") from exc
        if scorer_info.expected_sample_rate_hz != config.data.target_sample_rate:
            log.warning(
                "scorer %s expects %d Hz but preprocessing targets %d Hz",
                scorer_info.name, scorer_info.expected_sample_rate_hz,
                config.data.target_sample_rate,
            )
        if (scorer_info.expected_length_samples is not None
                and scorer_info.expected_length_samples != config.data.target_length):
            log.warning(
                "scorer %s expects %d samples but preprocessing targets %d",
                scorer_info.name, scorer_info.expected_length_samples,
                config.data.target_length,
            )

        reports: dict = {}
        dataset_scores: dict = {}
        failures: list[tuple[str, str]] = []
        for dataset_id, dataset_root, manifest_path in datasets:
            try:
                entries = read_manifest(manifest_path)
                records, labels, skipped = _score_dataset(
                    scorer, config, entries, dataset_root
                )
                if not records:
                    raise AuddtError("no decodable clips in dataset")
                data = LabeledScores.from_labels(
                    [r.score for r in records], labels
                )
                reports[dataset_id] = compute_report(
                    dataset_id, data,
                    threshold=config.evaluation.threshold,
                    skipped_files=skipped,
                )
                dataset_scores[dataset_id] = [
                    (r.entry_id, r.score, label)
                    for r, label in zip(records, labels)
                ]
            except (AuddtError, OSError) as exc:
                log.error("dataset %s failed: %s", dataset_id, exc)
                if config.evaluation.fail_fast:
                    raise
                failures.append((dataset_id, str(exc)))
        if not reports:
            raise AuddtError("every selected dataset failed; nothing to report")

        summaries = _summarize(reports, registry, _group_for_summaries(config))
        stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        result = RunResult(
            run_id=f"{stamp}-{config.config_hash()}",
            config_hash=config.config_hash(),
            config_echo=config.echo(),
            scorer_info=scorer_info,
            summaries=summaries,
            failures=failures,
            dataset_scores=dataset_scores,
        )
        emit_results(
            result,
            config.evaluation.results_dir,
            latex_path=config.evaluation.latex_output_path,
        )
        return result
    finally:
        if owns_scorer:
            scorer.close()


def reemit_run(run_dir) -> RunResult:
    """Recompute metrics from persisted score files and rewrite all outputs.

    Saved scores are the single source of truth: no audio is read and no
    scorer is attached. Per-dataset skipped counts and failures carry over
    from the saved results document.
    """
    run_dir = Path(run_dir)
    saved = load_results(run_dir / "results.json")
    echo = saved.config_echo
    threshold = echo["evaluation"]["threshold"]
    registry = (
        load_registry(Path(echo["data"]["registry_path"]))
        if echo["data"].get("registry_path")
        else default_registry()
    )
    skipped_by_dataset = {}
    for summary in saved.summaries:
        for dataset_id, report in summary.per_dataset.items():
            skipped_by_dataset[dataset_id] = report.skipped_files

    reports = {}
    dataset_scores = {}
    for score_file in sorted((run_dir / "scores").glob("*.csv")):
        dataset_id = score_file.stem
        rows = load_score_file(score_file)
        dataset_scores[dataset_id] = rows
        data = LabeledScores.from_labels(
            [score for _, score, _ in rows], [label for _, _, label in rows]
        )
        reports[dataset_id] = compute_report(
            dataset_id, data, threshold=threshold,
            skipped_files=skipped_by_dataset.get(dataset_id, 0),
        )
    if not reports:
        raise ConfigError(f"{run_dir} holds no score files to re-report")

    # rebuild exactly the groups the original run summarized
    saved_groups = [s.group_name for s in saved.summaries]
    known = {d.id for d in registry}
    if set(reports) <= known:
        summaries = aggregate(reports, registry, saved_groups)
    else:
        summaries = [_adhoc_all_summary(reports)]
    result = RunResult(
        run_id=saved.run_id,
        config_hash=saved.config_hash,
        config_echo=echo,
        scorer_info=saved.scorer_info,
        summaries=summaries,
        failures=saved.failures,
        dataset_scores=dataset_scores,
    )
    emit_results(result, run_dir)
    return result


def prepare_dataset(
    descriptor: DatasetDescriptor,
    data_root,
    overrides: Optional[list[tuple[str, str]]] = None,
) -> Path:
    """Normalize one dataset's raw label source into data_root/<id>/manifest.csv."""
    dataset_root = Path(data_root) / descriptor.id
    adapter = ADAPTERS[descriptor.adapter_id]
    raw = None
    if adapter.source_name is not None:
        source = dataset_root / adapter.source_name
        if not source.is_file():
            raise AuddtError(
                f"{descriptor.id}: expected label source {source} for adapter "
                f"{descriptor.adapter_id}"
            )
        raw = source.read_bytes()
    entries = normalize_labels(
        raw, descriptor.adapter_id, dataset_root, descriptor.id, overrides=overrides
    )
    manifest_path = dataset_root / "manifest.csv"
    write_manifest(entries, manifest_path)
    return manifest_path
