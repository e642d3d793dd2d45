"""Entropy certificates for random-field paths in rearrangement-invariant spaces."""

__version__ = "0.1.0"
