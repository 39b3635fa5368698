"""Weighted polyanalytic Bergman kernels: brute-force, closed-form and asymptotic."""

__version__ = "0.1.0"
