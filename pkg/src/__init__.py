"""
Incident desk: multi-agent incident diagnosis over metrics, logs and traces
"""

__version__ = "0.1.0"
