"""Trigonometric R-matrices, the associative Yang-Baxter equation, and the integrable tops built from them."""

from __future__ import annotations

__version__ = "0.1.0"
