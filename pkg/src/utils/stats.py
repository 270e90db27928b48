"""
Small order-statistic helpers shared by the log and trace processors
"""
import math


def nearest_rank_index(n, percentile):
    """
    1-based nearest-rank index ceil(p/100 * n), clamped to [1, n]

    Args:
        n (int): Number of observations (must be positive)
        percentile (float): Percentile in (0, 100]

    Returns:
        int: The 1-based rank
    """
    if n <= 0:
        raise ValueError("nearest rank needs at least one observation")
    # round() strips float noise such as 0.8 * 15 = 12.000000000000002
    rank = math.ceil(round(percentile * n / 100.0, 9))
    return min(max(rank, 1), n)


def nearest_rank(values, percentile):
    """Nearest-rank percentile of a non-empty collection of numbers"""
    ordered = sorted(values)
    return ordered[nearest_rank_index(len(ordered), percentile) - 1]
