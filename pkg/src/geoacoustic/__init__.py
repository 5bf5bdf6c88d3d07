"""Geometry-to-acoustics modal pipeline."""
