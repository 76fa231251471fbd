"""Built-in fixture models for integration testing without any ML stack."""

from __future__ import annotations

import numpy as np


class NullDetector:
    """Answers 0.5 for everything; the protocol smoke-test model."""

    name = "null"
    expected_sample_rate_hz = 16000

    def __init__(self, checkpoint=None, device="cpu", **_):
        pass

    def score(self, samples: np.ndarray, sample_rate_hz: int) -> float:
        return 0.5


class EnergyDetector:
    """Scores by RMS; valid for peak-normalized input where RMS <= 1."""

    name = "energy"
    expected_sample_rate_hz = 16000

    def __init__(self, checkpoint=None, device="cpu", **_):
        pass

    def score(self, samples: np.ndarray, sample_rate_hz: int) -> float:
        if samples.size == 0:
            return 0.0
        return float(np.sqrt(np.mean(np.square(samples, dtype=np.float64))))
