"""Fluid-domain geometry and built-in configurations."""
