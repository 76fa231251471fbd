"""Independent brute-force oracles used to cross-check the metrics module.

Nothing here imports the package's metric implementations; rates are
recomputed by direct counting so these stay an independent reference.
"""

from __future__ import annotations

import numpy as np


def auc_pair_count(scores: np.ndarray, is_spoof: np.ndarray) -> float:
    """O(n^2) pair statistic: wins + half-credit ties over spoof/bonafide pairs."""
    s_spoof = scores[is_spoof][:, None]
    s_bona = scores[~is_spoof][None, :]
    wins = np.sum(s_spoof > s_bona)
    ties = np.sum(s_spoof == s_bona)
    return float((wins + 0.5 * ties) / (s_spoof.shape[0] * s_bona.shape[1]))


def eer_threshold_sweep(scores: np.ndarray, is_spoof: np.ndarray) -> tuple[float, float]:
    """Brute-force interpolated EER: count rates at every candidate threshold.

    Candidates are the distinct scores in descending order preceded by an
    all-reject threshold (max score + 1). FPR and FNR are recounted directly
    at each candidate; the crossing of the piecewise-linear FPR/FNR curves is
    found segment by segment and both rates plus the threshold are linearly
    interpolated there.
    """
    spoof_scores = scores[is_spoof]
    bona_scores = scores[~is_spoof]
    candidates = [float(np.max(scores)) + 1.0]
    candidates.extend(sorted(set(float(v) for v in scores), reverse=True))
    fprs = []
    fnrs = []
    for t in candidates:
        fprs.append(np.mean(bona_scores >= t))
        fnrs.append(np.mean(spoof_scores < t))
    for k in range(1, len(candidates)):
        d_prev = fprs[k - 1] - fnrs[k - 1]
        d_here = fprs[k] - fnrs[k]
        if d_here >= 0.0:
            alpha = -d_prev / (d_here - d_prev)
            rate = fprs[k - 1] + alpha * (fprs[k] - fprs[k - 1])
            thr = candidates[k - 1] + alpha * (candidates[k] - candidates[k - 1])
            return float(rate), float(thr)
    raise AssertionError("FPR never reached FNR; malformed sweep")


def random_labeled_scores(rng: np.random.Generator, max_n: int = 200):
    """Random score/label vectors guaranteed to contain both classes.

    Mixes continuous and heavily tied score distributions.
    """
    n = int(rng.integers(2, max_n + 1))
    while True:
        is_spoof = rng.random(n) < rng.uniform(0.1, 0.9)
        if is_spoof.any() and not is_spoof.all():
            break
    if rng.random() < 0.5:
        scores = rng.random(n)
    else:
        scores = rng.integers(0, rng.integers(2, 12), size=n) / 11.0
    # optionally give one class a shift so informative cases appear too
    if rng.random() < 0.5:
        scores = 0.5 * scores + 0.4 * rng.random() * is_spoof
    return np.clip(scores, 0.0, 1.0), is_spoof
