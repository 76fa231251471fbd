"""Dataset registry: descriptors, taxonomy groups, and group resolution.

The shipped registry lives in data/registry.yaml (one YAML document holding
an array of dataset records) and is loaded read-only; descriptors are
immutable and safe to share across workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Iterable, Union

import yaml

from .errors import DuplicateDatasetError, RegistryFormatError, UnknownGroupError

_ID_RE = re.compile(r"^[a-z0-9_]+$")
_LANGUAGE_RE = re.compile(r"^([a-z]{2,3}|\d+\+?|many)$")

_MANY_LANGUAGES = 101  # stand-in count for "more than 100"


class Category(Enum):
    REAL_PLUS_FAKE = "real_plus_fake"
    RECODED_REAL_PLUS_FAKE = "recoded_real_plus_fake"
    FAKE_SINGING_VOICE = "fake_singing_voice"
    VOCODED_REAL = "vocoded_real"
    ENHANCED_REAL = "enhanced_real"
    REPLAYED_REAL = "replayed_real"
    REAL_ONLY = "real_only"
    FAKE_ONLY = "fake_only"


class GenerativeMethod(Enum):
    TTS_VC = "tts_vc"
    DIFFUSION = "diffusion"
    DIFF_FLOW = "diff_flow"
    CODEC_LLM = "codec_llm"
    VOCODERS_ONLY = "vocoders_only"
    ENHANCEMENT = "enhancement"
    SVS_SVC = "svs_svc"
    NA = "na"


# categories whose clips are "real but neurally processed"; these must opt out
# of accuracy-style group aggregates via group_exclusions
_EXCLUSION_REQUIRED = {
    Category.VOCODED_REAL,
    Category.RECODED_REAL_PLUS_FAKE,
    Category.ENHANCED_REAL,
}


@dataclass(frozen=True)
class FetchSource:
    url: str
    checksum: str  # sha256 hex
    unpack: str = "none"  # none | zip | tar


@dataclass(frozen=True)
class FetchDescriptor:
    sources: tuple[FetchSource, ...] = ()
    license_note: str = ""
    approximate_size_bytes: int = 0


@dataclass(frozen=True)
class DatasetDescriptor:
    id: str
    display_name: str
    category: Category
    in_the_wild: bool
    perturbation: bool
    languages: tuple[str, ...]
    accent: bool
    vocal_sounds: bool
    expressivity: bool
    uses_vocoder: bool
    uses_neural_codec: bool
    generative_method: GenerativeMethod
    adapter_id: str
    fetch: FetchDescriptor = field(default_factory=FetchDescriptor)
    group_exclusions: frozenset[str] = frozenset()

    def language_count(self) -> int:
        """Implied number of languages; count markers dominate ISO codes."""
        markers = []
        codes = 0
        for token in self.languages:
            if token == "many":
                markers.append(_MANY_LANGUAGES)
            elif token[0].isdigit():
                markers.append(int(token.rstrip("+")))
            else:
                codes += 1
        return max(markers) if markers else codes


GROUP_PREDICATES: dict[str, Callable[[DatasetDescriptor], bool]] = {
    "all": lambda d: True,
    "in_the_wild": lambda d: d.in_the_wild,
    "perturbation": lambda d: d.perturbation,
    "accent": lambda d: d.accent,
    "vocal_sounds": lambda d: d.vocal_sounds,
    "expressive": lambda d: d.expressivity,
    "vocoded": lambda d: d.uses_vocoder,
    "neural_codec": lambda d: d.uses_neural_codec,
    "multilingual": lambda d: d.language_count() > 1,
    "diffusion_flow": lambda d: d.generative_method
    in (GenerativeMethod.DIFFUSION, GenerativeMethod.DIFF_FLOW),
}

GROUP_NAMES = tuple(GROUP_PREDICATES)

_DESCRIPTOR_FIELDS = {
    "id", "display_name", "category", "in_the_wild", "perturbation",
    "languages", "accent", "vocal_sounds", "expressivity", "uses_vocoder",
    "uses_neural_codec", "generative_method", "adapter_id", "fetch",
    "group_exclusions",
}
_BOOL_FIELDS = (
    "in_the_wild", "perturbation", "accent", "vocal_sounds", "expressivity",
    "uses_vocoder", "uses_neural_codec",
)


def _parse_fetch(raw: dict, dataset_id: str) -> FetchDescriptor:
    if not isinstance(raw, dict):
        raise RegistryFormatError(f"{dataset_id}: fetch must be a mapping")
    unknown = set(raw) - {"sources", "license_note", "approximate_size_bytes"}
    if unknown:
        raise RegistryFormatError(f"{dataset_id}: unknown fetch fields {sorted(unknown)}")
    sources = []
    for i, src in enumerate(raw.get("sources") or []):
        url = src.get("url", "")
        checksum = src.get("checksum", "")
        unpack = src.get("unpack", "none")
        if not url:
            raise RegistryFormatError(f"{dataset_id}: fetch source {i} missing url")
        if not isinstance(checksum, str) or not checksum:
            raise RegistryFormatError(
                f"{dataset_id}: fetch source {i} needs a nonempty checksum, "
                "written as a quoted string"
            )
        if unpack not in ("none", "zip", "tar"):
            raise RegistryFormatError(f"{dataset_id}: bad unpack mode {unpack!r}")
        sources.append(FetchSource(url, checksum, unpack))
    return FetchDescriptor(
        sources=tuple(sources),
        license_note=str(raw.get("license_note", "")),
        approximate_size_bytes=int(raw.get("approximate_size_bytes", 0)),
    )


def _parse_descriptor(raw: dict, index: int) -> DatasetDescriptor:
    if not isinstance(raw, dict):
        raise RegistryFormatError(f"record {index} is not a mapping")
    dataset_id = raw.get("id")
    if not isinstance(dataset_id, str) or not _ID_RE.match(dataset_id):
        raise RegistryFormatError(f"record {index}: id {dataset_id!r} must match [a-z0-9_]+")
    unknown = set(raw) - _DESCRIPTOR_FIELDS
    if unknown:
        raise RegistryFormatError(f"{dataset_id}: unknown fields {sorted(unknown)}")
    missing = _DESCRIPTOR_FIELDS - {"fetch", "group_exclusions"} - set(raw)
    if missing:
        raise RegistryFormatError(f"{dataset_id}: missing fields {sorted(missing)}")

    try:
        category = Category(raw["category"])
    except ValueError:
        raise RegistryFormatError(f"{dataset_id}: unknown category {raw['category']!r}")
    try:
        method = GenerativeMethod(raw["generative_method"])
    except ValueError:
        raise RegistryFormatError(
            f"{dataset_id}: unknown generative_method {raw['generative_method']!r}"
        )

    for name in _BOOL_FIELDS:
        if not isinstance(raw[name], bool):
            raise RegistryFormatError(f"{dataset_id}: field {name} must be a boolean")

    languages = raw["languages"]
    if not isinstance(languages, list) or not languages:
        raise RegistryFormatError(f"{dataset_id}: languages must be a nonempty list")
    for token in languages:
        if not isinstance(token, str) or not _LANGUAGE_RE.match(token):
            raise RegistryFormatError(f"{dataset_id}: bad language token {token!r}")

    exclusions = raw.get("group_exclusions") or []
    for name in exclusions:
        if name not in GROUP_PREDICATES or name == "all":
            raise RegistryFormatError(f"{dataset_id}: bad group_exclusions entry {name!r}")
    if category in _EXCLUSION_REQUIRED and not exclusions:
        raise RegistryFormatError(
            f"{dataset_id}: category {category.value} requires nonempty group_exclusions"
        )

    return DatasetDescriptor(
        id=dataset_id,
        display_name=str(raw["display_name"]),
        category=category,
        in_the_wild=raw["in_the_wild"],
        perturbation=raw["perturbation"],
        languages=tuple(languages),
        accent=raw["accent"],
        vocal_sounds=raw["vocal_sounds"],
        expressivity=raw["expressivity"],
        uses_vocoder=raw["uses_vocoder"],
        uses_neural_codec=raw["uses_neural_codec"],
        generative_method=method,
        adapter_id=str(raw["adapter_id"]),
        fetch=_parse_fetch(raw.get("fetch") or {}, dataset_id),
        group_exclusions=frozenset(exclusions),
    )


def load_registry(source: Union[str, Path]) -> list[DatasetDescriptor]:
    """Load descriptors from YAML text or a file path, alphabetical by id."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif "\n" in source:
        text = source
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise RegistryFormatError(f"registry does not parse as YAML: {exc}") from exc
    if not isinstance(raw, list):
        raise RegistryFormatError("registry document must be an array of dataset records")
    descriptors = [_parse_descriptor(record, i) for i, record in enumerate(raw)]
    seen: dict[str, int] = {}
    for d in descriptors:
        if d.id in seen:
            raise DuplicateDatasetError(f"duplicate dataset id {d.id!r}")
        seen[d.id] = 1
    return sorted(descriptors, key=lambda d: d.id)


def default_registry() -> list[DatasetDescriptor]:
    """The shipped registry of 28 datasets."""
    text = resources.files("auddt").joinpath("data/registry.yaml").read_text("utf-8")
    return load_registry(text)


def select_group(
    group_name: str, registry: Iterable[DatasetDescriptor]
) -> list[DatasetDescriptor]:
    """Resolve a group name or single dataset id to descriptors, in id order."""
    descriptors = sorted(registry, key=lambda d: d.id)
    if group_name in GROUP_PREDICATES:
        predicate = GROUP_PREDICATES[group_name]
        return [d for d in descriptors if predicate(d)]
    for d in descriptors:
        if d.id == group_name:
            return [d]
    valid = ", ".join(list(GROUP_NAMES) + [d.id for d in descriptors])
    raise UnknownGroupError(f"unknown group {group_name!r}; valid names: {valid}")
