"""Executable chaining bounds for processes on finite and product index sets."""

__version__ = "0.1.0"
