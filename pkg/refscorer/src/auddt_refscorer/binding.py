"""Model binding: how a user-supplied detector is located and instantiated.

The wrapper is a Python file (or ``builtin`` for the shipped fixtures)
exposing a class. The class is constructed as
``Class(checkpoint=..., device=..., **model_args)`` and must expose either a
``score(samples, sample_rate_hz) -> float`` method or be callable with the
same signature; ``samples`` arrives as a float32 numpy array exactly as the
harness sent it (already resampled / normalized / length-fitted).
"""

from __future__ import annotations

import importlib.util
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional


class ModelLoadError(Exception):
    pass


@dataclass(frozen=True)
class ModelBinding:
    wrapper_path: str
    class_name: str
    checkpoint: Optional[str] = None
    device: str = "cpu"
    model_args: dict = field(default_factory=dict)
    squash: str = "none"  # none | sigmoid


def _load_class(binding: ModelBinding):
    if binding.wrapper_path == "builtin":
        from . import models

        try:
            return getattr(models, binding.class_name)
        except AttributeError as exc:
            raise ModelLoadError(
                f"no builtin model class {binding.class_name!r}"
            ) from exc
    path = Path(binding.wrapper_path)
    if not path.is_file():
        raise ModelLoadError(f"wrapper file not found: {path}")
    spec = importlib.util.spec_from_file_location(f"scorer_wrapper_{path.stem}", path)
    module = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(module)
    except Exception as exc:
        raise ModelLoadError(f"wrapper {path} failed to import: {exc}") from exc
    try:
        return getattr(module, binding.class_name)
    except AttributeError as exc:
        raise ModelLoadError(
            f"wrapper {path} defines no class {binding.class_name!r}"
        ) from exc


def instantiate(binding: ModelBinding):
    """Load and construct the bound model; returns a scoring callable holder."""
    cls = _load_class(binding)
    try:
        model = cls(
            checkpoint=binding.checkpoint,
            device=binding.device,
            **binding.model_args,
        )
    except Exception as exc:
        raise ModelLoadError(f"{binding.class_name} construction failed: {exc}") from exc
    if not (hasattr(model, "score") or callable(model)):
        raise ModelLoadError(
            f"{binding.class_name} exposes neither a score() method nor __call__"
        )
    return model
