"""Finite-section verification of spectral enclosures, Riesz projections and
Riesz-basis properties for perturbations of self-adjoint operators with
discrete spectrum."""

__version__ = "0.1.0"
