"""
Processors package for the incident desk: metrics, logs and traces distillation
"""
