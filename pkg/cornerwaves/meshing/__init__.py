"""Graded triangulation, mesh I/O and boundary trace grids."""
