"""
Console styling for the incident desk
"""
