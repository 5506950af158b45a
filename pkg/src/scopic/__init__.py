"""Certification of generalized S-scopic superpositions from quadrature statistics."""

__version__ = "0.1.0"
