"""Watermarking source code through context-aware variable renaming."""

__version__ = "0.1.0"
