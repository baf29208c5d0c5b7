"""Interpretable experiential learning: a transition graph over state histories,
trained by global feedback and queried by a utility-maximizing policy."""

__version__ = "0.1.0"
