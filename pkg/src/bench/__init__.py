"""
Benchmark cases, evaluation and dataset splits
"""
