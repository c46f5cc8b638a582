"""Computational modules: matset, bounds, theory, neural, simplex, polytope, registry, harness."""
