#!/usr/bin/env python3
"""ROC, AUC, and EER on a tiny hand-checkable score set, plus the exact
conventions this toolkit commits to.

Conventions: spoof is the positive class; a clip is predicted spoof iff
score >= threshold; AUC is the rank statistic with ties half-credited; EER
is the linear interpolation of the FPR = FNR crossing on the ROC.
"""

import numpy as np

from auddt import LabeledScores, auc, compute_report, confusion_at_threshold, eer, roc_curve

scores = [0.9, 0.4, 0.6, 0.1]
labels = ["spoof", "spoof", "bonafide", "bonafide"]
data = LabeledScores.from_labels(scores, labels)

print("scores:", dict(zip(scores, labels)), "\n")

print("ROC sweep (threshold, FPR, TPR):")
for point in roc_curve(data).points:
    print(f"  t={point.threshold:<8} FPR={point.fpr:.2f}  TPR={point.tpr:.2f}")

print(f"\nAUC  = {auc(data)}   (3 of 4 spoof/bonafide pairs correctly ordered)")
rate, threshold = eer(data)
print(f"EER  = {rate}  at interpolated threshold {threshold}")

stats = confusion_at_threshold(data, 0.5)
print(f"at fixed threshold 0.5: accuracy={stats.accuracy}  TPR={stats.tpr}  "
      f"TNR={stats.tnr}  counts={stats.counts}")

print("\none-class degradation (a bonafide-only dataset):")
bona_only = LabeledScores.from_labels([0.1, 0.2, 0.0], ["bonafide"] * 3)
report = compute_report("real_only_demo", bona_only, threshold=0.5)
print(f"  accuracy={report.accuracy}  TNR={report.tnr}  "
      f"TPR={report.tpr}  EER={report.eer}  AUC={report.auc}")

print("\nmonotone-transform invariance on random scores:")
rng = np.random.default_rng(3)
raw = rng.random(60)
is_spoof = rng.random(60) < 0.5
base = LabeledScores(raw, is_spoof)
squeezed = LabeledScores(raw**3, is_spoof)
print(f"  auc(raw)={auc(base):.6f}  auc(raw**3)={auc(squeezed):.6f}  "
      f"eer equal: {eer(base)[0] == eer(squeezed)[0]}")
