import math

import numpy as np
import pytest

from auddt.errors import EmptyInputError, OneClassError
from auddt.metrics import (
    LabeledScores,
    auc,
    compute_report,
    confusion_at_threshold,
    eer,
    roc_curve,
)

from oracles import auc_pair_count, eer_threshold_sweep, random_labeled_scores


def hand_case() -> LabeledScores:
    # spoof {0.9, 0.4}, bonafide {0.6, 0.1}
    return LabeledScores.from_labels(
        [0.9, 0.4, 0.6, 0.1], ["spoof", "spoof", "bonafide", "bonafide"]
    )


def test_roc_sweep_hand_case():
    curve = roc_curve(hand_case())
    swept = [(p.fpr, p.tpr) for p in curve.points]
    assert swept == [(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (0.5, 1.0), (1.0, 1.0)]
    thresholds = [p.threshold for p in curve.points]
    assert thresholds == [math.inf, 0.9, 0.6, 0.4, 0.1]
    assert all(a > b for a, b in zip(thresholds, thresholds[1:]))


def test_roc_monotone_and_separated():
    data = LabeledScores.from_labels(
        [0.9, 0.8, 0.2, 0.1], ["spoof", "spoof", "bonafide", "bonafide"]
    )
    curve = roc_curve(data)
    assert (0.0, 1.0) in [(p.fpr, p.tpr) for p in curve.points]
    fprs = [p.fpr for p in curve.points]
    tprs = [p.tpr for p in curve.points]
    assert fprs == sorted(fprs) and tprs == sorted(tprs)
    assert curve.points[0][1:] == (0.0, 0.0)
    assert curve.points[-1][1:] == (1.0, 1.0)


def test_roc_one_class_rejected():
    with pytest.raises(OneClassError):
        roc_curve(LabeledScores.from_labels([0.2, 0.7], ["spoof", "spoof"]))


def test_auc_hand_case():
    assert auc(hand_case()) == pytest.approx(0.75, abs=1e-12)


def test_auc_all_ties_and_separated():
    tied = LabeledScores.from_labels([0.5, 0.5, 0.5], ["spoof", "bonafide", "spoof"])
    assert auc(tied) == pytest.approx(0.5, abs=0)
    sep = LabeledScores.from_labels(
        [0.9, 0.8, 0.2, 0.1], ["spoof", "spoof", "bonafide", "bonafide"]
    )
    assert auc(sep) == 1.0


def test_eer_hand_case_crossing():
    value, threshold = eer(hand_case())
    assert value == pytest.approx(0.5, abs=1e-12)
    assert threshold == pytest.approx(0.6, abs=1e-12)


def test_eer_separated_is_zero():
    sep = LabeledScores.from_labels(
        [0.9, 0.8, 0.2, 0.1], ["spoof", "spoof", "bonafide", "bonafide"]
    )
    value, _ = eer(sep)
    assert value == 0.0


def test_eer_all_tied_is_half():
    tied = LabeledScores.from_labels([0.3, 0.3, 0.3, 0.3], ["spoof", "bonafide", "spoof", "bonafide"])
    value, _ = eer(tied)
    assert value == pytest.approx(0.5, abs=1e-12)


def test_confusion_hand_case():
    stats = confusion_at_threshold(hand_case(), 0.5)
    assert stats.accuracy == pytest.approx(0.5)
    assert stats.tpr == pytest.approx(0.5)
    assert stats.tnr == pytest.approx(0.5)
    assert stats.counts == (1, 1, 1, 1)


def test_confusion_threshold_tie_goes_to_spoof():
    data = LabeledScores.from_labels([0.5], ["spoof"])
    stats = confusion_at_threshold(data, 0.5)
    assert stats.counts.tp == 1 and stats.counts.fn == 0


def test_confusion_one_class_degrades():
    bona_only = LabeledScores.from_labels([0.0, 0.0, 0.0], ["bonafide"] * 3)
    stats = confusion_at_threshold(bona_only, 0.5)
    assert stats.accuracy == 1.0
    assert stats.tnr == 1.0
    assert stats.tpr is None


def test_empty_input_rejected():
    with pytest.raises(EmptyInputError):
        LabeledScores.from_labels([], [])


def test_score_range_validated():
    with pytest.raises(ValueError):
        LabeledScores.from_labels([1.2], ["spoof"])
    with pytest.raises(ValueError):
        LabeledScores.from_labels([float("nan")], ["spoof"])


def test_auc_matches_pair_count_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        scores, is_spoof = random_labeled_scores(rng)
        data = LabeledScores(scores, is_spoof)
        assert auc(data) == pytest.approx(auc_pair_count(scores, is_spoof), abs=1e-9)


def test_eer_matches_sweep_oracle():
    rng = np.random.default_rng(11)
    for _ in range(200):
        scores, is_spoof = random_labeled_scores(rng)
        data = LabeledScores(scores, is_spoof)
        got_rate, got_thr = eer(data)
        want_rate, want_thr = eer_threshold_sweep(scores, is_spoof)
        assert got_rate == pytest.approx(want_rate, abs=1e-9)
        assert got_thr == pytest.approx(want_thr, abs=1e-9)


def test_auc_equals_trapezoid_area_under_roc():
    rng = np.random.default_rng(13)
    for _ in range(100):
        scores, is_spoof = random_labeled_scores(rng)
        data = LabeledScores(scores, is_spoof)
        curve = roc_curve(data)
        fpr = np.array([p.fpr for p in curve.points])
        tpr = np.array([p.tpr for p in curve.points])
        area = float(np.trapezoid(tpr, fpr))
        assert auc(data) == pytest.approx(area, abs=1e-9)


def test_monotone_transform_invariance():
    rng = np.random.default_rng(17)
    for _ in range(50):
        scores, is_spoof = random_labeled_scores(rng)
        data = LabeledScores(scores, is_spoof)
        # affine increasing map into [0, 1]: EER and AUC invariant
        mapped = LabeledScores(0.25 * scores + 0.5, is_spoof)
        assert auc(mapped) == pytest.approx(auc(data), abs=1e-12)
        rate, _ = eer(data)
        m_rate, _ = eer(mapped)
        assert m_rate == pytest.approx(rate, abs=1e-12)
        # nonlinear increasing map: rates invariant
        squared = LabeledScores(scores**2, is_spoof)
        assert auc(squared) == pytest.approx(auc(data), abs=1e-12)
        assert eer(squared)[0] == pytest.approx(rate, abs=1e-12)


def test_eer_threshold_maps_through_affine_transform():
    # tie-free scores keep the crossing off the degenerate all-reject anchor,
    # so the interpolated threshold transforms exactly with the scores
    rng = np.random.default_rng(41)
    for _ in range(50):
        n = int(rng.integers(4, 150))
        scores = rng.permutation(np.linspace(0.02, 0.98, n))
        is_spoof = np.zeros(n, dtype=bool)
        is_spoof[rng.choice(n, size=int(rng.integers(1, n)), replace=False)] = True
        if is_spoof.all() or not is_spoof.any():
            continue
        data = LabeledScores(scores, is_spoof)
        mapped = LabeledScores(0.25 * scores + 0.5, is_spoof)
        rate, thr = eer(data)
        m_rate, m_thr = eer(mapped)
        assert m_rate == pytest.approx(rate, abs=1e-12)
        assert m_thr == pytest.approx(0.25 * thr + 0.5, abs=1e-9)


def test_permutation_invariance():
    rng = np.random.default_rng(19)
    scores, is_spoof = random_labeled_scores(rng)
    data = LabeledScores(scores, is_spoof)
    perm = rng.permutation(scores.size)
    shuffled = LabeledScores(scores[perm], is_spoof[perm])
    assert auc(shuffled) == auc(data)
    assert eer(shuffled) == eer(data)
    assert confusion_at_threshold(shuffled, 0.5)[:3] == confusion_at_threshold(data, 0.5)[:3]


def test_accuracy_is_class_weighted_mix():
    rng = np.random.default_rng(23)
    for _ in range(50):
        scores, is_spoof = random_labeled_scores(rng)
        data = LabeledScores(scores, is_spoof)
        stats = confusion_at_threshold(data, float(rng.random()))
        n_s, n_b = data.n_spoof, data.n_bonafide
        mixed = (stats.tpr * n_s + stats.tnr * n_b) / (n_s + n_b)
        assert stats.accuracy == pytest.approx(mixed, abs=1e-12)


def test_eer_below_half_on_informative_instances():
    # on clearly informative data (spoof scores shifted up) AUC >= 0.5 and the
    # interpolated EER stays in [0, 0.5]
    rng = np.random.default_rng(29)
    checked = 0
    for _ in range(300):
        n = int(rng.integers(4, 200))
        is_spoof = rng.random(n) < 0.5
        if is_spoof.all() or not is_spoof.any():
            continue
        scores = 0.5 * rng.random(n) + 0.45 * is_spoof
        data = LabeledScores(np.clip(scores, 0.0, 1.0), is_spoof)
        if auc(data) >= 0.5:
            value, _ = eer(data)
            assert 0.0 <= value <= 0.5 + 1e-12
            checked += 1
    assert checked > 250


def test_eer_above_half_possible_despite_auc_above_half():
    # adversarially clustered scores: AUC favors spoof overall, yet no
    # operating point reaches balanced error below 0.5
    data = LabeledScores.from_labels(
        [0.95, 0.9, 0.85, 0.1, 0.05, 0.93, 0.92, 0.5, 0.45, 0.4],
        ["bonafide"] * 5 + ["spoof"] * 5,
    )
    assert auc(data) == pytest.approx(0.56, abs=1e-12)
    value, _ = eer(data)
    assert value == pytest.approx(0.6, abs=1e-12)


def test_eer_negation_symmetry_tie_free():
    rng = np.random.default_rng(31)
    for _ in range(100):
        n = int(rng.integers(4, 120))
        scores = rng.permutation(np.linspace(0.01, 0.99, n))  # tie-free
        is_spoof = np.zeros(n, dtype=bool)
        is_spoof[rng.choice(n, size=int(rng.integers(1, n)), replace=False)] = True
        if is_spoof.all() or not is_spoof.any():
            continue
        forward, _ = eer(LabeledScores(scores, is_spoof))
        flipped, _ = eer(LabeledScores(1.0 - scores, is_spoof))
        assert forward + flipped == pytest.approx(1.0, abs=1e-9)


def test_compute_report_two_class_and_one_class():
    report = compute_report("toy", hand_case(), threshold=0.5, skipped_files=2)
    assert report.n_spoof == 2 and report.n_bonafide == 2
    assert report.auc == pytest.approx(0.75)
    assert report.eer == pytest.approx(0.5)
    assert report.accuracy == pytest.approx(0.5)
    assert report.skipped_files == 2

    bona_only = LabeledScores.from_labels([0.0, 0.1], ["bonafide", "bonafide"])
    one_class = compute_report("real_only", bona_only, threshold=0.5)
    assert one_class.auc is None and one_class.eer is None
    assert one_class.tpr is None
    assert one_class.tnr == 1.0
    assert one_class.accuracy == 1.0


def test_report_dict_round_trip():
    report = compute_report("toy", hand_case(), threshold=0.5)
    from auddt.metrics import MetricsReport

    assert MetricsReport.from_dict(report.to_dict()) == report
