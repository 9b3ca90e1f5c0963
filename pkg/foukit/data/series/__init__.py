"""Bundled observed series; see README.md for provenance."""
