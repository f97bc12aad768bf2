"""Span-constrained optimistic exploration for average-reward MDPs."""

__version__ = "0.1.0"
