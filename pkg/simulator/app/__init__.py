"""Lossy Loop Simulator: PID control over a lossy wireless sensor link"""

__version__ = "1.0.0"
