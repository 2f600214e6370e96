"""Spectral toolkit for the twisted Laplacian on C^n.

Basis evaluation, twisted convolution, the complex-time semigroup, Schatten
analysis of the time-extension operator, Fourier-singularity probes, and an
empirical harness for mixed-norm bounds on orthonormal systems.
"""

__version__ = "0.1.0"
