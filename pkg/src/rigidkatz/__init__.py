"""Exact formal-type calculus on the projective line and the irregular Katz algorithm."""

from __future__ import annotations

__version__ = "0.1.0"
