"""Tests for lochaus."""
