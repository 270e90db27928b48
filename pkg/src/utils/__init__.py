"""
Utility modules for the incident desk
"""
