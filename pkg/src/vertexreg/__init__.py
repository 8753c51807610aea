"""Numerical and exact tools for vertex regularity of paraboloid domains
under blow-up scaling (heat, Stokes/Navier-Stokes and bi-harmonic flows)."""

__version__ = "0.1.0"
