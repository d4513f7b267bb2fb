"""Data-space inversion of production forecasts: DSI-ESMDA and PCA + RML."""

__version__ = "1.0.0"
