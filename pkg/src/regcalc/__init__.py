"""Register calculus for quantum and classical program state."""

__version__ = "0.1.0"
