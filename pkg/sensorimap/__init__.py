"""Sensorimotor maps: SOM/VDSOM lattices linked by Oja-Hebbian connections."""

__version__ = "1.0.0"
