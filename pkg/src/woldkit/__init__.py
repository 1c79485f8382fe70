"""Wold-type decompositions of isometric representations of product systems.

Finite-dimensional C*-correspondences, product systems over ℕ₀ᵏ and their
covariant representations are stored as explicit matrices.
"""

__version__ = "0.1.0"
