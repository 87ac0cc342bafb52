"""
Simulation engine: initialization, plays, update rules, observables and batches.
"""
