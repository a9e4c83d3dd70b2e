"""Coupled-oscillator simulation on graphs and learned synchronization prediction."""

__version__ = "0.1.0"
