"""Tests for gaitscope."""
