"""Fusion rings and modules of the AH family, with verifiers for their dual
graphs, the generalized Haagerup cubic system and the Drinfeld-center data."""

__version__ = "0.1.0"
