"""Malnormal subgroups of free groups and distortion in HNN extensions."""

__version__ = "0.1.0"
