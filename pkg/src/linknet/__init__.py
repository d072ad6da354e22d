"""Directed-graph analytics for hyperlinked page collections."""

__version__ = "0.1.0"
