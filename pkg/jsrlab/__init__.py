"""
Joint spectral radius estimation.

- matset: products, spectral radii and benchmark sets
- bounds: product lower bound and ellipsoidal upper bound
- theory: closed-form accuracy guarantees
- neural: ReLU Lyapunov functions trained on sphere samples
- polytope: certified bound from a trained network via gauge LPs
- harness: experiment configs, reports and CSV reproductions
"""

__version__ = "0.1.0"

from jsrlab.tools.matset import (
    product_of_word,
    spectral_radius,
    benchmark_sigma2,
    benchmark_sigma8,
    benchmark_family,
)
from jsrlab.tools.bounds import lower_bound_products, ellipsoidal_upper_bound
from jsrlab.tools.neural import train, loss, forward, sample_sphere
from jsrlab.tools.polytope import build_polytope_norm, gauge, certified_bound, interior_check
from jsrlab.tools.simplex import solve_lp, solve_standard_form
from jsrlab.tools.harness import run_experiment, table1_repro, convergence_trace
from jsrlab.tools.registry import resolve_benchmark

__all__ = [
    "__version__",
    # Matrix sets
    "product_of_word",
    "spectral_radius",
    "benchmark_sigma2",
    "benchmark_sigma8",
    "benchmark_family",
    "resolve_benchmark",
    # Bounds
    "lower_bound_products",
    "ellipsoidal_upper_bound",
    # Neural
    "train",
    "loss",
    "forward",
    "sample_sphere",
    # Polytope
    "build_polytope_norm",
    "gauge",
    "certified_bound",
    "interior_check",
    "solve_lp",
    "solve_standard_form",
    # Harness
    "run_experiment",
    "table1_repro",
    "convergence_trace",
]
