"""Distributed kernel interpolation of noisy scattered data on spheres."""
from ._accel import backend

__version__ = "0.1.0"
