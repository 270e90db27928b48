"""
Reward, judging, reflection and rollout export
"""
