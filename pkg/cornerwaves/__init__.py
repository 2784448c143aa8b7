"""corner-waves: finite elements for linear surface waves on domains with corners."""

__version__ = "0.1.0"
