"""Concept-based interactive evaluation and customization of document summaries."""

__version__ = "0.1.0"
