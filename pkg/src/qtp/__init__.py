"""Finite-dimensional quantum teleportation: protocols, channels and fidelities."""

__version__ = "0.1.0"
