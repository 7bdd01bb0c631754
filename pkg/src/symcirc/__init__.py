"""Symmetric arithmetic circuits for homomorphism, subgraph and immanant polynomials."""

__version__ = "0.1.0"
