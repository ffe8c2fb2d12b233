"""Tests for seisflow."""
