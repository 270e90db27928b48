"""
Anomaly shape classification

The classifier contract is `ShapeClassifier.classify(series, anomaly)`; the shipped
implementation is rule based and a learned model can be dropped in behind the same
contract.
"""
from enum import Enum
from itertools import combinations

import numpy as np


class ShapePattern(str, Enum):
    SUDDEN_SPIKE_UP = "sudden_spike_up"
    SUDDEN_SPIKE_DOWN = "sudden_spike_down"
    LEVEL_SHIFT_UP = "level_shift_up"
    LEVEL_SHIFT_DOWN = "level_shift_down"
    STEADY_INCREASE = "steady_increase"
    STEADY_DECREASE = "steady_decrease"
    FLUCTUATION = "fluctuation"

    def __str__(self):
        return self.value


class ShapeClassifier:
    """Contract for anomaly shape classifiers"""

    def classify(self, series, anomaly):
        raise NotImplementedError


def sign_agreement(values):
    """
    Kendall-style trend agreement over all ordered pairs

    Returns:
        tuple: (agreement in [0, 1], direction) where direction is +1 for rising,
            -1 for falling and 0 when no pair moves
    """
    rising = falling = total = 0
    for earlier, later in combinations(values, 2):
        total += 1
        if later > earlier:
            rising += 1
        elif later < earlier:
            falling += 1
    if total == 0 or rising == falling == 0:
        return 0.0, 0
    if rising >= falling:
        return rising / total, 1
    return falling / total, -1


class RuleShapeClassifier(ShapeClassifier):
    """Deterministic rules over a context of `pre` samples before and `post` after"""

    def __init__(self, pre=20, post=10, trend_agreement=0.8):
        self.pre = pre
        self.post = post
        self.trend_agreement = trend_agreement

    def context(self, series, anomaly):
        """
        Pre-window, anomaly value and post-window, padded by edge replication

        Raises:
            ValueError: If the anomaly timestamp is not in the series
        """
        history = series.history()
        values = [s.value for s in history]
        index = next((i for i, s in enumerate(history) if s.timestamp == anomaly.timestamp), None)
        if index is None:
            raise ValueError(f"t={anomaly.timestamp} is not a sample of {series.key}")

        value = values[index]
        before = values[max(0, index - self.pre):index] or [value]
        after = values[index + 1:index + 1 + self.post] or [value]
        before = [before[0]] * (self.pre - len(before)) + before
        after = after + [after[-1]] * (self.post - len(after))
        return np.asarray(before, dtype=float), value, np.asarray(after, dtype=float)

    def classify(self, series, anomaly):
        before, value, after = self.context(series, anomaly)
        mu_pre = float(np.mean(before))
        sigma_pre = max(float(np.std(before)), 1e-6 * max(abs(mu_pre), 1.0))
        mu_post = float(np.mean(after))
        shift = mu_post - mu_pre

        if abs(value - mu_pre) > 3 * sigma_pre and abs(shift) <= sigma_pre:
            return ShapePattern.SUDDEN_SPIKE_UP if value > mu_pre else ShapePattern.SUDDEN_SPIKE_DOWN

        trail = np.concatenate(([value], after))
        agreement, direction = sign_agreement(trail)
        trending = agreement >= self.trend_agreement

        # flat post window: no monotone trend, or the drift across it is small next to the shift
        slope = float(np.polyfit(np.arange(len(after)), after, 1)[0]) if len(after) > 1 else 0.0
        drift = abs(slope) * (len(after) - 1)
        if abs(shift) > 3 * sigma_pre and (not trending or drift <= 0.5 * abs(shift)):
            return ShapePattern.LEVEL_SHIFT_UP if shift > 0 else ShapePattern.LEVEL_SHIFT_DOWN

        if trending:
            return ShapePattern.STEADY_INCREASE if direction > 0 else ShapePattern.STEADY_DECREASE
        return ShapePattern.FLUCTUATION
