"""Discrete Dirichlet-Neumann operator."""
