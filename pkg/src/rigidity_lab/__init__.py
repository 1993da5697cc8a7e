"""Comparison energies of polyhedral cones, rigidity counterexamples and a hyperbolic mass check."""

__version__ = "0.1.0"
