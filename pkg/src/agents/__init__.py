"""
Agent runtime: profiles, prompts, chat backends and reply parsing
"""
