"""Hypoelliptic calculus toolkit for two noncommuting vector fields."""

__version__ = "0.1.0"
