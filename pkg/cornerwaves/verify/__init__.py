"""Diagnostic suites, ensembles and identity checks."""
