"""Command-line interface.

Subcommands: list, fetch, prepare, evaluate, report. Exit codes: 0 success,
1 run failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import parse_config
from .errors import AuddtError, ConfigError
from .fetch import fetch_dataset
from .manifest import read_manifest, read_overrides, validate_manifest
from .registry import GROUP_NAMES, default_registry, load_registry, select_group
from .runner import prepare_dataset, reemit_run, run_evaluation

log = logging.getLogger(__name__)


def _registry_from(args) -> list:
    if getattr(args, "registry", None):
        return load_registry(Path(args.registry))
    return default_registry()


def _cmd_list(args) -> int:
    registry = _registry_from(args)
    print("datasets:")
    for descriptor in registry:
        print(f"  {descriptor.id}  ({descriptor.display_name})")
    print("groups:")
    for name in GROUP_NAMES:
        members = select_group(name, registry)
        print(f"  {name}  [{len(members)} datasets]")
    return 0


def _cmd_fetch(args) -> int:
    registry = _registry_from(args)
    failed = 0
    for descriptor in select_group(args.name, registry):
        if not descriptor.fetch.sources:
            print(
                f"{descriptor.id}: no fetch sources declared; "
                f"{descriptor.fetch.license_note}"
            )
            continue
        try:
            destination = fetch_dataset(descriptor, Path(args.data_root))
            print(f"{descriptor.id}: fetched into {destination}")
        except AuddtError as exc:
            print(f"{descriptor.id}: FAILED: {exc}", file=sys.stderr)
            failed += 1
    return 1 if failed else 0


def _cmd_prepare(args) -> int:
    registry = _registry_from(args)
    overrides = read_overrides(Path(args.overrides)) if args.overrides else None
    failed = 0
    for descriptor in select_group(args.name, registry):
        try:
            manifest_path = prepare_dataset(
                descriptor, Path(args.data_root), overrides=overrides
            )
            entries = read_manifest(manifest_path)
            report = validate_manifest(entries, manifest_path.parent)
            status = "ok" if report.passed else "INCOMPLETE"
            print(
                f"{descriptor.id}: {report.total} entries "
                f"({report.per_label_counts['bonafide']} bonafide / "
                f"{report.per_label_counts['spoof']} spoof), "
                f"{report.missing_files} missing, "
                f"{report.duplicate_ids} duplicate ids -> {status}"
            )
            if not report.passed:
                failed += 1
        except AuddtError as exc:
            print(f"{descriptor.id}: FAILED: {exc}", file=sys.stderr)
            failed += 1
    return 1 if failed else 0


def _cmd_evaluate(args) -> int:
    config_path = Path(args.config)
    if not config_path.is_file():
        print(f"config file not found: {config_path}", file=sys.stderr)
        return 2
    config = parse_config(config_path)
    result = run_evaluation(config)
    print(f"run {result.run_id}: outputs in {config.evaluation.results_dir}")
    for summary in result.summaries:
        print(
            f"  group {summary.group_name}: mean accuracy "
            f"{summary.mean_accuracy:.4f}, median {summary.median_accuracy:.4f} "
            f"over {len(summary.member_dataset_ids)} datasets"
        )
    for dataset_id, message in result.failures:
        print(f"  failed {dataset_id}: {message}", file=sys.stderr)
    return 1 if result.failures else 0


def _cmd_report(args) -> int:
    run_dir = Path(args.run)
    if not (run_dir / "results.json").is_file():
        print(f"no results.json under {run_dir}", file=sys.stderr)
        return 2
    result = reemit_run(run_dir)
    print(f"re-emitted outputs for {result.config_hash} in {run_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auddt",
        description="Benchmark audio deepfake detectors across datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("list", help="show dataset ids and group names")
    p_list.add_argument("--registry", help="registry YAML overriding the shipped one")
    p_list.set_defaults(func=_cmd_list)

    p_fetch = sub.add_parser("fetch", help="download and verify dataset sources")
    p_fetch.add_argument("name", help="dataset id or group name")
    p_fetch.add_argument("--data-root", default="data", help="dataset storage root")
    p_fetch.add_argument("--registry")
    p_fetch.set_defaults(func=_cmd_fetch)

    p_prepare = sub.add_parser("prepare", help="normalize labels into manifests")
    p_prepare.add_argument("name", help="dataset id or group name")
    p_prepare.add_argument("--data-root", default="data")
    p_prepare.add_argument("--registry")
    p_prepare.add_argument("--overrides", help="two-column (selector,label) CSV")
    p_prepare.set_defaults(func=_cmd_prepare)

    p_eval = sub.add_parser("evaluate", help="run a configured evaluation")
    p_eval.add_argument("--config", required=True, help="YAML run configuration")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_report = sub.add_parser("report", help="re-emit outputs from saved scores")
    p_report.add_argument("--run", required=True, help="results directory of a run")
    p_report.set_defaults(func=_cmd_report)
    return parser


def cli(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except AuddtError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli())
