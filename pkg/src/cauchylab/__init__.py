"""Numerical lab for linear waves near the Cauchy horizon of charged de Sitter black holes."""

__version__ = "0.1.0"
