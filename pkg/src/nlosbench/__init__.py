"""NLoS detection from V2V packet-delivery traces."""

__version__ = "0.1.0"
