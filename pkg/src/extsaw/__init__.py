"""Exact enumeration of self-avoiding walks and their extendable variants
on quasi-transitive graphs, with growth, branching-number and symmetry
diagnostics."""

__version__ = "0.1.0"
