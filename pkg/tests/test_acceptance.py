"""Acceptance gate: one test per release criterion, at pinned tolerances.

Each test prints an ACCEPTANCE PASS line on success (visible with -s or in
captured output); a failing criterion fails its test.
"""

import time
from pathlib import Path

import numpy as np
import pytest

from auddt.audio import AudioBuffer, fit_duration, resample
from auddt.config import parse_config
from auddt.metrics import LabeledScores, auc, confusion_at_threshold, eer
from auddt.registry import default_registry, select_group
from auddt.runner import reemit_run, run_evaluation
from auddt.synthcorpus import CorpusSpec

from e2e_helpers import build_corpus_site, config_text
from test_audio import band_energy_ratio
from oracles import auc_pair_count, eer_threshold_sweep, random_labeled_scores
from test_config import WRAPPER_STYLE_CONFIG
from test_report import fixture_result

GOLDEN_DIR = Path(__file__).parent / "golden"


def _ok(name: str) -> None:
    print(f"ACCEPTANCE PASS: {name}")


def test_metrics_oracle_suite():
    started = time.perf_counter()
    rng = np.random.default_rng(20240901)
    for _ in range(1000):
        scores, is_spoof = random_labeled_scores(rng, max_n=200)
        data = LabeledScores(scores, is_spoof)
        assert auc(data) == pytest.approx(
            auc_pair_count(scores, is_spoof), abs=1e-9
        )
        got_rate, got_thr = eer(data)
        want_rate, want_thr = eer_threshold_sweep(scores, is_spoof)
        assert got_rate == pytest.approx(want_rate, abs=1e-9)
        assert got_thr == pytest.approx(want_thr, abs=1e-9)
    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"oracle suite took {elapsed:.1f} s"
    _ok(f"metrics oracle suite (1000 instances, {elapsed:.1f} s)")


def test_hand_worked_case():
    data = LabeledScores.from_labels(
        [0.9, 0.4, 0.6, 0.1], ["spoof", "spoof", "bonafide", "bonafide"]
    )
    assert auc(data) == pytest.approx(0.75, abs=1e-12)
    stats = confusion_at_threshold(data, 0.5)
    assert stats.accuracy == pytest.approx(0.5, abs=1e-12)
    assert stats.tpr == pytest.approx(0.5, abs=1e-12)
    assert stats.tnr == pytest.approx(0.5, abs=1e-12)
    _ok("hand-worked case: AUC 0.75, accuracy/TPR/TNR 0.5 at threshold 0.5")


def test_one_class_behavior(tmp_path):
    specs = [CorpusSpec("bona_only", n_bonafide=5, n_spoof=0,
                        label_format="listing_real_only", seed=31)]
    data_root, registry_path = build_corpus_site(tmp_path, specs)
    config = parse_config(
        config_text(data_root, registry_path, tmp_path / "results",
                    scorer="builtin:constant")
        + "scorer_args:\n  c: 0.0\n"
    )
    result = run_evaluation(config)
    report = result.summaries[0].per_dataset["bona_only"]
    assert report.accuracy is not None and report.tnr is not None
    assert report.eer is None and report.auc is None
    assert report.tpr is None
    _ok("one-class dataset: accuracy/TNR present, EER/AUC absent")


def test_preprocessing_contract():
    started = time.perf_counter()
    short = fit_duration(AudioBuffer(np.ones(8000), 16000), 64000)
    assert short.samples.size == 64000
    assert np.all(short.samples[8000:] == 0.0)
    long = fit_duration(AudioBuffer(np.arange(96000, dtype=float), 16000), 64000)
    assert long.samples.size == 64000
    assert np.array_equal(long.samples, np.arange(64000, dtype=float))

    t = np.arange(48000) / 48000
    sine = resample(AudioBuffer(0.6 * np.sin(2 * np.pi * 440.0 * t), 48000), 16000)
    spectrum = np.abs(np.fft.rfft(sine.samples))
    peak_bin = int(np.argmax(spectrum))
    assert abs(peak_bin - 440) <= 1
    gain_db = 20 * np.log10(spectrum[peak_bin] * 2 / sine.samples.size / 0.6)
    assert abs(gain_db) <= 0.5

    rng = np.random.default_rng(77)
    noise = resample(AudioBuffer(0.5 * rng.standard_normal(48000), 48000), 16000)
    # plain band-energy ratio (leakage-inflated) must already clear 60 dB;
    # the Hann-windowed measurement of the true aliasing floor must clear 70 dB
    plain = band_energy_ratio(noise.samples, 16000, 7600.0, windowed=False)
    true_floor = band_energy_ratio(noise.samples, 16000, 7600.0, windowed=True)
    assert plain <= 1e-6
    assert true_floor <= 1e-7
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"preprocessing checks took {elapsed:.1f} s"
    _ok(f"preprocessing contract (fit 8k/96k->64k, 440 Hz bin, "
        f"{-10 * np.log10(plain):.0f} dB plain / "
        f"{-10 * np.log10(true_floor):.0f} dB windowed anti-alias, {elapsed:.1f} s)")


def test_end_to_end_determinism(tmp_path):
    started = time.perf_counter()
    specs = [
        CorpusSpec("sep_set", n_bonafide=6, n_spoof=6,
                   sample_rate_hz=22050, separability="separable", seed=41),
        CorpusSpec("mix_set", n_bonafide=6, n_spoof=6,
                   separability="overlapping", seed=42),
        CorpusSpec("real_set", n_bonafide=6, n_spoof=0, sample_rate_hz=44100,
                   label_format="listing_real_only", seed=43),
    ]
    data_root, registry_path = build_corpus_site(tmp_path, specs)
    results_dir = tmp_path / "results"
    snapshots = []
    for workers in (1, 3):
        config = parse_config(
            config_text(data_root, registry_path, results_dir, num_workers=workers)
        )
        result = run_evaluation(config)
        snapshots.append(
            {
                p.relative_to(results_dir).as_posix(): p.read_bytes()
                for p in sorted(results_dir.rglob("*"))
                if p.is_file()
            }
        )
    assert snapshots[0] == snapshots[1], "outputs differ across worker counts"
    sep_report = result.summaries[0].per_dataset["sep_set"]
    assert sep_report.eer == 0.0
    assert sep_report.auc == 1.0
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0, f"end-to-end runs took {elapsed:.1f} s"
    _ok(f"end-to-end determinism across worker counts; separable EER 0 / AUC 1 "
        f"({elapsed:.1f} s)")


def test_config_fidelity():
    config = parse_config(WRAPPER_STYLE_CONFIG)
    assert config.data.target_sample_rate == 16000
    assert config.data.target_length == 64000
    assert config.evaluation.batch_size == 256
    assert config.data.group_name == "all"
    assert config.evaluation.threshold == 0.5
    _ok("config fidelity: exemplar document values + threshold default 0.5")


def test_registry_fidelity():
    import csv

    registry = {d.id: d for d in default_registry()}
    with (GOLDEN_DIR / "table1.csv").open(newline="") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 28 and len(registry) == 28
    for row in rows:
        d = registry[row["id"]]
        assert d.category.value == row["category"]
        for column in ("in_the_wild", "perturbation", "accent", "vocal_sounds",
                       "expressivity", "uses_vocoder", "uses_neural_codec"):
            assert getattr(d, column) == bool(int(row[column])), (row["id"], column)
        assert list(d.languages) == row["languages"].split(";")
        assert d.generative_method.value == row["generative_method"]
    perturbation = [d.id for d in select_group("perturbation", default_registry())]
    assert perturbation == [
        "asvspoof2021_df", "asvspoof2021_la", "asvspoof5",
        "for_rerecorded", "playback_attacks",
    ]
    _ok("registry fidelity: 28 golden rows + perturbation group membership")


def test_report_fidelity(tmp_path):
    from auddt.report import emit_latex, emit_results
    import json
    import statistics

    result = fixture_result()
    assert emit_latex(result) == (GOLDEN_DIR / "fixture_table.tex").read_text()

    written = emit_results(result, tmp_path / "fixture_run")
    payload = json.loads(written["results"].read_text())
    accuracies = {
        dataset_id: report["accuracy"]
        for summary in payload["summaries"] if summary["group_name"] == "all"
        for dataset_id, report in summary["per_dataset"].items()
    }
    recomputed_median = statistics.median(accuracies.values())
    plot_rows = written["plot_data"].read_text().splitlines()[1:]
    for line in plot_rows:
        dataset_id, accuracy, below = line.split(",")
        assert (float(accuracy) < recomputed_median) == (below == "true"), line

    specs = [CorpusSpec("refit", n_bonafide=5, n_spoof=5, seed=51)]
    data_root, registry_path = build_corpus_site(tmp_path, specs)
    results_dir = tmp_path / "results"
    run_evaluation(parse_config(config_text(data_root, registry_path, results_dir)))
    before = {
        p.relative_to(results_dir).as_posix(): p.read_bytes()
        for p in sorted(results_dir.rglob("*")) if p.is_file()
    }
    reemit_run(results_dir)
    after = {
        p.relative_to(results_dir).as_posix(): p.read_bytes()
        for p in sorted(results_dir.rglob("*")) if p.is_file()
    }
    assert before == after
    _ok("report fidelity: LaTeX golden, below-median flags, byte-identical re-emit")
