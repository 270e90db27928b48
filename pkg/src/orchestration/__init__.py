"""
Intent interpretation, diagnosis workflow and reports
"""
