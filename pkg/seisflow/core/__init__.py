"""
Core package for seisflow.

Contains the wave propagator, the imaging objective and optimizer, the
cloud simulator, the event-driven reducer, the workflow interpreter and the
cost/performance metrics.
"""
