"""Model server implementing the summary-engine backend protocol."""

__version__ = "0.1.0"
