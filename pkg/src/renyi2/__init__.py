"""Minimal Rényi-2 output entropy and purity of quantum channels."""

__version__ = "0.1.0"
