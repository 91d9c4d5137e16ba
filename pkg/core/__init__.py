"""Algorithms and I/O for lochaus."""
