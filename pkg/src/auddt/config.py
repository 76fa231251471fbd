"""Run configuration: YAML parsing, normalization, defaults, and hashing.

Two spellings are accepted and normalized to one canonical form: the
external-model layout (model.path, data.data_args.target_*, an
evaluation_settings section) and the canonical field names used here
(model.wrapper_path, data.target_*, evaluation). Unknown keys warn;
missing required keys fail.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import yaml

from .errors import ConfigError
from .scorer import BUILTIN_KINDS

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
DEFAULT_TARGET_SAMPLE_RATE = 16000
DEFAULT_TARGET_LENGTH = 64000
DEFAULT_BATCH_SIZE = 256
DEFAULT_SCORER_COMMAND = ("auddt-scorer",)


@dataclass(frozen=True)
class ModelConfig:
    wrapper_path: str
    class_name: str
    checkpoint: Optional[str]
    device: str = "cpu"
    model_args: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DataConfig:
    manifest_path: Path
    group_name: str
    target_sample_rate: int = DEFAULT_TARGET_SAMPLE_RATE
    target_length: int = DEFAULT_TARGET_LENGTH
    registry_path: Optional[Path] = None


@dataclass(frozen=True)
class EvaluationConfig:
    results_dir: Path
    batch_size: int = DEFAULT_BATCH_SIZE
    latex_output_path: Optional[Path] = None
    threshold: float = DEFAULT_THRESHOLD
    fail_fast: bool = False
    num_workers: int = 1


@dataclass(frozen=True)
class EvalConfig:
    data: DataConfig
    evaluation: EvaluationConfig
    model: Optional[ModelConfig] = None
    scorer: str = "external"
    scorer_args: dict = field(default_factory=dict)
    scorer_command: tuple[str, ...] = DEFAULT_SCORER_COMMAND

    def echo(self) -> dict:
        """Fully resolved configuration, canonical key names, stable order.

        num_workers is deliberately absent: it is an execution knob that
        cannot change results, and the persisted echo must be identical
        across worker counts.
        """
        model = None
        if self.model is not None:
            model = {
                "wrapper_path": self.model.wrapper_path,
                "class_name": self.model.class_name,
                "checkpoint": self.model.checkpoint,
                "device": self.model.device,
                "model_args": self.model.model_args,
            }
        return {
            "model": model,
            "data": {
                "manifest_path": str(self.data.manifest_path),
                "group_name": self.data.group_name,
                "target_sample_rate": self.data.target_sample_rate,
                "target_length": self.data.target_length,
                "registry_path": (
                    str(self.data.registry_path) if self.data.registry_path else None
                ),
            },
            "evaluation": {
                "results_dir": str(self.evaluation.results_dir),
                "batch_size": self.evaluation.batch_size,
                "latex_output_path": (
                    str(self.evaluation.latex_output_path)
                    if self.evaluation.latex_output_path
                    else None
                ),
                "threshold": self.evaluation.threshold,
                "fail_fast": self.evaluation.fail_fast,
            },
            "scorer": self.scorer,
            "scorer_args": self.scorer_args,
            "scorer_command": list(self.scorer_command),
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.echo(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def _warn_unknown(section: str, mapping: dict, known: set) -> None:
    prefix = f"{section}." if section else ""
    for key in sorted(set(mapping) - known):
        log.warning("config: ignoring unknown key %s%s", prefix, key)


def _require(mapping: dict, key: str, section: str):
    if key not in mapping or mapping[key] is None:
        raise ConfigError(f"config is missing required key {section}.{key}")
    return mapping[key]


def parse_config(source: Union[str, Path]) -> EvalConfig:
    """Parse YAML config text (or a path to it) into an EvalConfig."""
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    elif "\n" in source:
        text = source
    else:
        text = Path(source).read_text(encoding="utf-8")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"config does not parse as YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of sections")

    _warn_unknown("", raw, {
        "model", "data", "evaluation", "evaluation_settings",
        "scorer", "scorer_args", "scorer_command",
    })

    scorer = str(raw.get("scorer", "external"))
    if scorer != "external":
        if not scorer.startswith("builtin:") or scorer.split(":", 1)[1] not in BUILTIN_KINDS:
            raise ConfigError(
                f"scorer must be 'external' or 'builtin:<kind>' with kind in {BUILTIN_KINDS}"
            )
    scorer_args = raw.get("scorer_args") or {}
    if not isinstance(scorer_args, dict):
        raise ConfigError("scorer_args must be a mapping")
    scorer_command = tuple(raw.get("scorer_command") or DEFAULT_SCORER_COMMAND)

    model = None
    model_raw = raw.get("model")
    if model_raw is not None:
        if not isinstance(model_raw, dict):
            raise ConfigError("model section must be a mapping")
        _warn_unknown("model", model_raw, {
            "path", "wrapper_path", "class_name", "checkpoint", "device", "model_args",
        })
        wrapper = model_raw.get("wrapper_path", model_raw.get("path"))
        if wrapper is None:
            raise ConfigError("config is missing required key model.wrapper_path")
        checkpoint = model_raw.get("checkpoint")
        model = ModelConfig(
            wrapper_path=str(wrapper),
            class_name=str(model_raw.get("class_name", "AudioDeepfakeDetector")),
            checkpoint=str(checkpoint) if checkpoint is not None else None,
            device=str(model_raw.get("device", "cpu")),
            model_args=model_raw.get("model_args") or {},
        )
    if scorer == "external":
        if model is None:
            raise ConfigError("external scorer mode requires a model section")
        if model.checkpoint is None:
            raise ConfigError("config is missing required key model.checkpoint")

    data_raw = raw.get("data")
    if not isinstance(data_raw, dict):
        raise ConfigError("config is missing required section data")
    _warn_unknown("data", data_raw, {
        "manifest_path", "group_name", "data_args",
        "target_sample_rate", "target_length", "registry_path",
    })
    data_args = data_raw.get("data_args") or {}
    if not isinstance(data_args, dict):
        raise ConfigError("data.data_args must be a mapping")
    _warn_unknown("data.data_args", data_args, {"target_sample_rate", "target_length"})
    rate = int(
        data_args.get("target_sample_rate",
                      data_raw.get("target_sample_rate", DEFAULT_TARGET_SAMPLE_RATE))
    )
    length = int(
        data_args.get("target_length",
                      data_raw.get("target_length", DEFAULT_TARGET_LENGTH))
    )
    if rate <= 0:
        raise ConfigError("data.target_sample_rate must be positive")
    if length <= 0:
        raise ConfigError("data.target_length must be positive")
    registry_path = data_raw.get("registry_path")
    data = DataConfig(
        manifest_path=Path(_require(data_raw, "manifest_path", "data")),
        group_name=str(_require(data_raw, "group_name", "data")),
        target_sample_rate=rate,
        target_length=length,
        registry_path=Path(registry_path) if registry_path else None,
    )

    eval_raw = raw.get("evaluation_settings", raw.get("evaluation"))
    if not isinstance(eval_raw, dict):
        raise ConfigError("config is missing required section evaluation_settings")
    _warn_unknown("evaluation_settings", eval_raw, {
        "results_dir", "batch_size", "latex_output_path", "threshold",
        "fail_fast", "num_workers",
    })
    batch_size = int(eval_raw.get("batch_size", DEFAULT_BATCH_SIZE))
    if batch_size <= 0:
        raise ConfigError("evaluation_settings.batch_size must be positive")
    threshold = float(eval_raw.get("threshold", DEFAULT_THRESHOLD))
    if not 0.0 <= threshold <= 1.0:
        raise ConfigError("evaluation_settings.threshold must lie in [0, 1]")
    num_workers = int(eval_raw.get("num_workers", 1))
    if num_workers <= 0:
        raise ConfigError("evaluation_settings.num_workers must be positive")
    latex = eval_raw.get("latex_output_path")
    evaluation = EvaluationConfig(
        results_dir=Path(_require(eval_raw, "results_dir", "evaluation_settings")),
        batch_size=batch_size,
        latex_output_path=Path(latex) if latex else None,
        threshold=threshold,
        fail_fast=bool(eval_raw.get("fail_fast", False)),
        num_workers=num_workers,
    )

    return EvalConfig(
        data=data,
        evaluation=evaluation,
        model=model,
        scorer=scorer,
        scorer_args=scorer_args,
        scorer_command=scorer_command,
    )
