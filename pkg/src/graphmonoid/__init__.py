"""Refinement monoids from I-systems and their graph realizations."""

__version__ = "0.1.0"
