"""
Knowledge stores for the expert agents
"""
