"""Exact computational toolkit for entropy theory of Z^d and R^d actions."""

__version__ = "0.1.0"
