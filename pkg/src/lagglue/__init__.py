"""Gluing Lawlor necks into Grim Reaper translating solitons, numerically."""

__version__ = "0.1.0"
