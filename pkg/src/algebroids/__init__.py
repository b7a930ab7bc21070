"""Coordinate models of Lie algebroids with symplectic-like reduction.

Subpackages cover the symbolic expression layer, algebroid calculus, Lie
algebra / tangent-group machinery, lifts and flows, Hamiltonian structures,
the canonical cover of the dual bundle, and the reduction engine.
"""

__version__ = "0.1.0"
