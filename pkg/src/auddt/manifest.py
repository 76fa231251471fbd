"""Manifest schema, label-source adapters, overrides, and validation.

Heterogeneous dataset label sources are normalized into one flat manifest:
a CSV with header entry_id,dataset_id,relative_path,label,subgroup,
duration_seconds. Adapters fail closed with line numbers; label overrides
are applied after parsing and may target single entries or whole subgroups.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path, PurePosixPath
from typing import Callable, Iterable, Optional, Sequence, Union

from .errors import (
    AdapterParseError,
    ManifestFormatError,
    OverrideTargetError,
    UnknownAdapterError,
)
from .metrics import BONAFIDE, LABELS, SPOOF

MANIFEST_COLUMNS = (
    "entry_id", "dataset_id", "relative_path", "label", "subgroup",
    "duration_seconds",
)

_AUDIO_SUFFIXES = (".wav", ".flac")


@dataclass(frozen=True)
class ManifestEntry:
    entry_id: str
    dataset_id: str
    relative_path: str
    label: str
    subgroup: Optional[str] = None
    duration_seconds: Optional[float] = None

    def __post_init__(self):
        if not self.entry_id:
            raise ValueError("entry_id must be nonempty")
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        path = PurePosixPath(self.relative_path)
        if not self.relative_path or ".." in path.parts or path.is_absolute():
            raise ValueError(f"bad relative_path {self.relative_path!r}")
        if self.duration_seconds is not None and self.duration_seconds < 0:
            raise ValueError("duration_seconds must be non-negative")

    def resolve(self, dataset_root: Union[str, Path]) -> Path:
        return Path(dataset_root) / PurePosixPath(self.relative_path)


@dataclass(frozen=True)
class ValidationReport:
    total: int
    per_label_counts: dict
    missing_files: int
    duplicate_ids: int

    @property
    def passed(self) -> bool:
        return self.missing_files == 0 and self.duplicate_ids == 0 and self.total > 0


def _decode_text(raw_source: bytes, adapter_id: str) -> str:
    try:
        return raw_source.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise AdapterParseError(f"{adapter_id} source is not UTF-8 text: {exc}") from exc


def _check_unique(entries: Sequence[ManifestEntry]) -> None:
    seen = set()
    for e in entries:
        if e.entry_id in seen:
            raise AdapterParseError(f"duplicate entry id {e.entry_id!r}")
        seen.add(e.entry_id)


def _parse_asvspoof_protocol(raw_source, dataset_root, dataset_id):
    """Space-delimited rows: speaker utterance - attack label."""
    entries = []
    for number, line in enumerate(_decode_text(raw_source, "asvspoof_protocol").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 5:
            raise AdapterParseError(
                f"expected 5 space-delimited fields, got {len(parts)}", number
            )
        _speaker, utterance, _, attack, label = parts
        if label not in LABELS:
            raise AdapterParseError(f"unknown label {label!r}", number)
        entries.append(
            ManifestEntry(
                entry_id=utterance,
                dataset_id=dataset_id,
                relative_path=f"{utterance}.wav",
                label=label,
                subgroup=None if attack == "-" else attack,
            )
        )
    _check_unique(entries)
    return entries


def _parse_csv_labeled(raw_source, dataset_root, dataset_id):
    """CSV with header; requires path and label columns, id/subgroup optional."""
    reader = csv.DictReader(io.StringIO(_decode_text(raw_source, "csv_labeled")))
    header = reader.fieldnames or []
    if "path" not in header or "label" not in header:
        raise AdapterParseError("header must declare path and label columns", 1)
    entries = []
    for number, row in enumerate(reader, 2):
        path = (row.get("path") or "").strip()
        label = (row.get("label") or "").strip()
        if not path:
            raise AdapterParseError("empty path", number)
        if label not in LABELS:
            raise AdapterParseError(f"unknown label {label!r}", number)
        duration = (row.get("duration_seconds") or "").strip()
        try:
            entries.append(
                ManifestEntry(
                    entry_id=(row.get("id") or "").strip() or PurePosixPath(path).stem,
                    dataset_id=dataset_id,
                    relative_path=path,
                    label=label,
                    subgroup=(row.get("subgroup") or "").strip() or None,
                    duration_seconds=float(duration) if duration else None,
                )
            )
        except ValueError as exc:
            raise AdapterParseError(str(exc), number) from exc
    _check_unique(entries)
    return entries


_DIR_LABELS = {"real": BONAFIDE, "bonafide": BONAFIDE, "fake": SPOOF, "spoof": SPOOF}


def _parse_dirtree(raw_source, dataset_root, dataset_id):
    """Label from the parent directory name (real/bonafide vs fake/spoof)."""
    root = Path(dataset_root)
    if not root.is_dir():
        raise AdapterParseError(f"dataset root {root} is not a directory")
    entries = []
    for path in sorted(root.rglob("*")):
        if path.suffix.lower() not in _AUDIO_SUFFIXES or not path.is_file():
            continue
        label = _DIR_LABELS.get(path.parent.name.lower())
        if label is None:
            continue  # unlabeled side directory
        rel = path.relative_to(root).as_posix()
        entries.append(
            ManifestEntry(
                entry_id=str(PurePosixPath(rel).with_suffix("")),
                dataset_id=dataset_id,
                relative_path=rel,
                label=label,
            )
        )
    _check_unique(entries)
    return entries


def _parse_listing(raw_source, dataset_root, dataset_id, label):
    entries = []
    for number, line in enumerate(_decode_text(raw_source, "listing").splitlines(), 1):
        rel = line.strip()
        if not rel:
            continue
        try:
            entries.append(
                ManifestEntry(
                    entry_id=str(PurePosixPath(rel).with_suffix("")),
                    dataset_id=dataset_id,
                    relative_path=rel,
                    label=label,
                )
            )
        except ValueError as exc:
            raise AdapterParseError(str(exc), number) from exc
    _check_unique(entries)
    return entries


@dataclass(frozen=True)
class Adapter:
    name: str
    parse: Callable
    source_name: Optional[str]  # conventional raw-source file under the dataset root


ADAPTERS: dict[str, Adapter] = {
    "asvspoof_protocol": Adapter("asvspoof_protocol", _parse_asvspoof_protocol, "protocol.txt"),
    "csv_labeled": Adapter("csv_labeled", _parse_csv_labeled, "labels.csv"),
    "dirtree": Adapter("dirtree", _parse_dirtree, None),
    "listing_real_only": Adapter(
        "listing_real_only",
        lambda raw, root, did: _parse_listing(raw, root, did, BONAFIDE),
        "listing.txt",
    ),
    "listing_fake_only": Adapter(
        "listing_fake_only",
        lambda raw, root, did: _parse_listing(raw, root, did, SPOOF),
        "listing.txt",
    ),
}


def normalize_labels(
    raw_source: Optional[bytes],
    adapter_id: str,
    dataset_root: Union[str, Path],
    dataset_id: str,
    overrides: Optional[Sequence[tuple[str, str]]] = None,
) -> list[ManifestEntry]:
    """Run a registered adapter over a raw label source, then apply overrides."""
    adapter = ADAPTERS.get(adapter_id)
    if adapter is None:
        raise UnknownAdapterError(
            f"unknown adapter {adapter_id!r}; registered: {sorted(ADAPTERS)}"
        )
    if adapter.source_name is not None and raw_source is None:
        raise AdapterParseError(f"adapter {adapter_id} requires a raw label source")
    entries = adapter.parse(raw_source, dataset_root, dataset_id)
    if overrides:
        entries = apply_overrides(entries, overrides)
    return entries


def read_overrides(source: Union[str, Path]) -> list[tuple[str, str]]:
    """Parse a two-column (selector, new_label) override table."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, Path) else source
    rows = []
    for number, row in enumerate(csv.reader(io.StringIO(text)), 1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise ManifestFormatError(f"override line {number}: expected 2 columns")
        rows.append((row[0].strip(), row[1].strip()))
    return rows


def apply_overrides(
    entries: Sequence[ManifestEntry], overrides: Sequence[tuple[str, str]]
) -> list[ManifestEntry]:
    """Relabel entries by selector.

    Selectors: ``subgroup:<name>`` hits every entry in the subgroup,
    ``entry:<id>`` (or a bare id) hits one entry. Subgroup overrides apply
    first so entry-level rules win. Only labels change.
    """
    subgroup_rules = {}
    entry_rules = {}
    for selector, new_label in overrides:
        if new_label not in LABELS:
            raise OverrideTargetError(f"override label must be one of {LABELS}, got {new_label!r}")
        if selector.startswith("subgroup:"):
            subgroup_rules[selector[len("subgroup:"):]] = new_label
        elif selector.startswith("entry:"):
            entry_rules[selector[len("entry:"):]] = new_label
        else:
            entry_rules[selector] = new_label

    known_subgroups = {e.subgroup for e in entries if e.subgroup}
    known_ids = {e.entry_id for e in entries}
    for name in subgroup_rules:
        if name not in known_subgroups:
            raise OverrideTargetError(f"override subgroup {name!r} matches no entry")
    for name in entry_rules:
        if name not in known_ids:
            raise OverrideTargetError(f"override entry {name!r} matches no entry")

    out = []
    for e in entries:
        label = e.label
        if e.subgroup in subgroup_rules:
            label = subgroup_rules[e.subgroup]
        if e.entry_id in entry_rules:
            label = entry_rules[e.entry_id]
        out.append(replace(e, label=label) if label != e.label else e)
    return out


def write_manifest(entries: Iterable[ManifestEntry], path: Union[str, Path]) -> None:
    """Write the manifest CSV atomically (temp file + rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".manifest-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(MANIFEST_COLUMNS)
            for e in entries:
                writer.writerow(
                    [
                        e.entry_id,
                        e.dataset_id,
                        e.relative_path,
                        e.label,
                        e.subgroup or "",
                        repr(e.duration_seconds) if e.duration_seconds is not None else "",
                    ]
                )
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise


def read_manifest(path: Union[str, Path]) -> list[ManifestEntry]:
    with Path(path).open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ManifestFormatError(f"{path}: empty manifest")
        if tuple(header) != MANIFEST_COLUMNS:
            missing = set(MANIFEST_COLUMNS) - set(header)
            detail = f"missing columns {sorted(missing)}" if missing else f"bad header {header}"
            raise ManifestFormatError(f"{path}: {detail}")
        entries = []
        for number, row in enumerate(reader, 2):
            if len(row) != len(MANIFEST_COLUMNS):
                raise ManifestFormatError(f"{path}:{number}: expected {len(MANIFEST_COLUMNS)} fields")
            entry_id, dataset_id, rel, label, subgroup, duration = row
            try:
                entries.append(
                    ManifestEntry(
                        entry_id=entry_id,
                        dataset_id=dataset_id,
                        relative_path=rel,
                        label=label,
                        subgroup=subgroup or None,
                        duration_seconds=float(duration) if duration else None,
                    )
                )
            except ValueError as exc:
                raise ManifestFormatError(f"{path}:{number}: {exc}") from exc
    return entries


def validate_manifest(
    entries: Sequence[ManifestEntry], dataset_root: Union[str, Path]
) -> ValidationReport:
    """Count label totals, missing audio files, and duplicate entry ids."""
    counts = {BONAFIDE: 0, SPOOF: 0}
    missing = 0
    seen = set()
    duplicates = 0
    for e in entries:
        counts[e.label] += 1
        if e.entry_id in seen:
            duplicates += 1
        seen.add(e.entry_id)
        if not e.resolve(dataset_root).is_file():
            missing += 1
    return ValidationReport(
        total=len(entries),
        per_label_counts=counts,
        missing_files=missing,
        duplicate_ids=duplicates,
    )
