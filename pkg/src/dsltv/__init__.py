"""Bounded verification of layered, monotone model transformations."""

__version__ = "0.1.0"
