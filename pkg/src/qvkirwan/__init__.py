"""Exact computations on Nakajima quiver varieties and their graded-tripled models."""

__version__ = "0.1.0"
