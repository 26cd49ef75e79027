"""Hybrid small-world/scale-free networks and mixed SIS/SIR/SIRS propagation."""

__version__ = "0.1.0"
