"""Geometry document loading."""
