"""Exhaustive certificates for non-singular zeros of quintic forms over small finite fields."""

__version__ = "0.1.0"
