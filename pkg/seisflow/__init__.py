"""
seisflow: event-driven seismic imaging on a simulated serverless cloud.
"""

__version__ = "0.1.0"
