"""Simulated capacitive limb tracking: sensing, estimation, and control."""

__version__ = "0.1.0"
