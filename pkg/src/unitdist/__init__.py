"""Unit and distinct distances under general norms."""

__version__ = "0.1.0"
