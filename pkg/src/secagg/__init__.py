"""Single-server secure aggregation with a beacon-selected committee."""

__version__ = "0.1.0"
