"""Modes, couplings and back-action dynamics of polariton optomechanical resonators."""

__version__ = "0.1.0"
