"""Exact wall-crossing algebra: KS transformations, scattering diagrams,
cluster dynamics and toric degeneration ideals."""

__version__ = "0.1.0"
