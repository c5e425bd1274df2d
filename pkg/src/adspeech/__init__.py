"""Acoustic and lexical screening features for picture-description speech."""

__version__ = "0.1.0"
