"""Spin(7) structures in eight dimensions: exterior and Clifford kernels,
the Spin(7) connection with skew torsion, and pointwise curvature checks."""

__version__ = "0.1.0"
