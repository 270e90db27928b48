"""
Seeded train/test split of benchmark cases
"""
import random

from utils.errors import ConfigError, DatasetError


def split(cases, ratio=0.6, seed=0):
    """
    Shuffle with `seed`, then take the first round(ratio * N) cases as training

    Returns:
        tuple: (train, test) lists, disjoint and together exhaustive
    """
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must lie in (0, 1), got {ratio}")
    cases = list(cases)
    if len(cases) < 2:
        raise DatasetError(f"Need at least 2 cases to split, got {len(cases)}")
    random.Random(seed).shuffle(cases)
    n_train = int(round(ratio * len(cases)))
    return cases[:n_train], cases[n_train:]
