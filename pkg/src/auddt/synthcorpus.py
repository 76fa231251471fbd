"""Deterministic synthetic mini-datasets for desk-scale pipeline testing.

Clips are seeded sine tones with controlled saturation plus a little noise.
Class separability is carried by the crest factor (bonafide stays sine-like,
spoof is saturated toward a square wave), so the spoof-over-bonafide RMS
ordering holds both for the raw files and after peak normalization in the
evaluation pipeline. Output mirrors real dataset onboarding: a dataset root
with audio files plus a raw label source in the requested adapter format.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .audio import write_wav
from .errors import ReportIOError
from .manifest import ADAPTERS

SEPARABILITIES = ("separable", "overlapping", "identical")


@dataclass(frozen=True)
class CorpusSpec:
    dataset_id: str
    n_bonafide: int
    n_spoof: int
    sample_rate_hz: int = 16000
    duration_s: float = 1.0
    label_format: str = "csv_labeled"
    separability: str = "separable"
    seed: int = 0

    def __post_init__(self):
        if self.n_bonafide < 0 or self.n_spoof < 0 or self.n_bonafide + self.n_spoof == 0:
            raise ValueError("need a nonnegative clip count with at least one clip")
        if self.sample_rate_hz <= 0 or self.duration_s <= 0:
            raise ValueError("sample_rate_hz and duration_s must be positive")
        if self.label_format not in ADAPTERS:
            raise ValueError(f"label_format must be a registered adapter, got {self.label_format!r}")
        if self.separability not in SEPARABILITIES:
            raise ValueError(f"separability must be one of {SEPARABILITIES}")
        if self.label_format == "listing_real_only" and self.n_spoof:
            raise ValueError("listing_real_only corpora must be bonafide-only")
        if self.label_format == "listing_fake_only" and self.n_bonafide:
            raise ValueError("listing_fake_only corpora must be spoof-only")


def _saturated_tone(rng: np.random.Generator, n: int, rate: int,
                    amplitude: float, saturation: float) -> np.ndarray:
    freq = rng.uniform(180.0, 700.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(n) / rate
    tone = np.sin(2.0 * np.pi * freq * t + phase)
    if saturation > 0.0:
        tone = np.tanh(saturation * tone) / np.tanh(saturation)
    clip = amplitude * tone + 0.01 * amplitude * rng.uniform(-1.0, 1.0, size=n)
    return np.clip(clip, -1.0, 1.0)


def _clip_waveform(spec: CorpusSpec, is_spoof: bool, index: int) -> np.ndarray:
    n = int(round(spec.duration_s * spec.sample_rate_hz))
    if spec.separability == "identical":
        rng = np.random.default_rng([spec.seed, 424242])
        return _saturated_tone(rng, n, spec.sample_rate_hz, 0.5, 0.0)
    rng = np.random.default_rng([spec.seed, int(is_spoof), index])
    if spec.separability == "separable":
        if is_spoof:
            # hard saturation: high RMS both raw and after peak normalization
            return _saturated_tone(rng, n, spec.sample_rate_hz,
                                   rng.uniform(0.55, 0.8), rng.uniform(6.0, 9.0))
        return _saturated_tone(rng, n, spec.sample_rate_hz,
                               rng.uniform(0.2, 0.3), 0.0)
    # overlapping: shifted but intersecting saturation/amplitude ranges
    if is_spoof:
        return _saturated_tone(rng, n, spec.sample_rate_hz,
                               rng.uniform(0.3, 0.7), rng.uniform(1.0, 6.0))
    return _saturated_tone(rng, n, spec.sample_rate_hz,
                           rng.uniform(0.25, 0.6), rng.uniform(0.0, 2.5))


def _clip_plan(spec: CorpusSpec) -> list[tuple[str, bool]]:
    """(entry stem, is_spoof) pairs, bonafide first, deterministic names."""
    plan = [(f"{spec.dataset_id}_b{i:04d}", False) for i in range(spec.n_bonafide)]
    plan += [(f"{spec.dataset_id}_s{i:04d}", True) for i in range(spec.n_spoof)]
    return plan


def generate_corpus(
    spec: CorpusSpec, out_dir: Union[str, Path]
) -> tuple[Path, Optional[Path]]:
    """Emit WAV clips plus a raw label source; returns (root, label source).

    The label source path is None for the dirtree format, where the
    directory layout itself carries the labels.
    """
    root = Path(out_dir) / spec.dataset_id
    try:
        root.mkdir(parents=True, exist_ok=True)
        audio_dir = {
            "asvspoof_protocol": root,
            "csv_labeled": root / "clips",
            "listing_real_only": root,
            "listing_fake_only": root,
        }.get(spec.label_format)

        relative_paths = {}
        for index, (stem, is_spoof) in enumerate(_clip_plan(spec)):
            if spec.label_format == "dirtree":
                rel = f"{'fake' if is_spoof else 'real'}/{stem}.wav"
                target = root / rel
                target.parent.mkdir(exist_ok=True)
            else:
                target = audio_dir / f"{stem}.wav"
                target.parent.mkdir(parents=True, exist_ok=True)
                rel = target.relative_to(root).as_posix()
            samples = _clip_waveform(spec, is_spoof, index)
            target.write_bytes(write_wav(samples, spec.sample_rate_hz, fmt="pcm16"))
            relative_paths[stem] = (rel, is_spoof)

        label_path: Optional[Path] = None
        if spec.label_format == "asvspoof_protocol":
            label_path = root / "protocol.txt"
            lines = []
            spoof_counter = 0
            for stem, (rel, is_spoof) in relative_paths.items():
                if is_spoof:
                    attack = f"A{spoof_counter % 3 + 1:02d}"
                    spoof_counter += 1
                else:
                    attack = "-"
                speaker = f"SPK{len(lines) % 5:02d}"
                label = "spoof" if is_spoof else "bonafide"
                lines.append(f"{speaker} {stem} - {attack} {label}")
            label_path.write_text("\n".join(lines) + "\n")
        elif spec.label_format == "csv_labeled":
            label_path = root / "labels.csv"
            rows = ["path,label"]
            rows += [
                f"{rel},{'spoof' if is_spoof else 'bonafide'}"
                for rel, is_spoof in relative_paths.values()
            ]
            label_path.write_text("\n".join(rows) + "\n")
        elif spec.label_format in ("listing_real_only", "listing_fake_only"):
            label_path = root / "listing.txt"
            label_path.write_text(
                "\n".join(rel for rel, _ in relative_paths.values()) + "\n"
            )
    except OSError as exc:
        raise ReportIOError(f"could not write corpus under {out_dir}: {exc}") from exc
    return root, label_path
