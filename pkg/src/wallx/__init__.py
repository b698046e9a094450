"""Exact wall-crossing algebra: groupoid-graded algebras, stability data,
A_n Hall calculus and V-stability conditions."""

__version__ = "0.1.0"
