"""Directional discrepancy of planar point sets for rotated rectangles."""

__version__ = "0.1.0"
