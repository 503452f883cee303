"""Sinkless orientation: SLOCAL construction, validators and a lower-bound refuter."""

__version__ = "0.1.0"
