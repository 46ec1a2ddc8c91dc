"""Entanglement entropy of free fermionic chains and its Möbius covariance."""

__version__ = "0.1.0"
