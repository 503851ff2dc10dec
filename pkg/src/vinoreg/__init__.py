"""Censored random-effects panel regressions for world wine export shares."""

__version__ = "0.1.0"
