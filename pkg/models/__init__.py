"""Data models for lochaus."""
