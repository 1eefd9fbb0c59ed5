"""Cubic preferences: separability characters of Gray-path preference orders."""

from ._backend import BACKEND

__version__ = "0.1.0"
