"""Numerical hyperbolic geometry: half-plane kernel, right-angled polygon
spaces, shear Hessians of distance, eutaxy classification, and extremal
systole equations."""

__version__ = "0.1.0"
