"""Executable round elimination laboratory for two-party classical and quantum protocols."""

__version__ = "0.1.0"
