"""Relative resource quantifiers and subchannel-discrimination checks."""

__version__ = "0.1.0"
