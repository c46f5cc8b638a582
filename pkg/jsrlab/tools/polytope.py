"""
Post-processing of a trained network into a certified polytope norm.

The unit ball is the symmetric hull conv{±x_i / V(x_i)} over the sample
points. Its gauge (Minkowski functional) is a genuine norm, so

    max_i ‖A_i‖_N = max_i max_{vertices v} gauge(A_i v)

is a certified upper bound on the JSR. The induced norm is attained at a
vertex because the unit ball is the convex hull of its vertices.
"""

import logging
import time
from typing import Optional

import numpy as np

from jsrlab.errors import InfeasibleLPError, PolytopeBuildError, ShapeError, UnboundedDirectionError
from jsrlab.schemas.bounds import BoundKind, BoundReport
from jsrlab.schemas.matrix_set import MatrixSet
from jsrlab.schemas.network import SampleSet, TrainResult
from jsrlab.schemas.polytope import PolytopeNorm
from jsrlab.tools.neural import forward
from jsrlab.tools.simplex import DEFAULT_TOL, solve_standard_form

logger = logging.getLogger(__name__)


def build_polytope_norm(
    result: TrainResult,
    samples: Optional[SampleSet] = None,
    eps: float = 1e-9,
) -> PolytopeNorm:
    """
    Polytope conv{±x_i / V(x_i)} from the best parameters of a training run.

    ``samples`` defaults to the run's final sample set. Samples with
    V(x_i) < eps are dropped with a warning. The gauge of the result is at
    most V(x_i) on each retained direction, with equality whenever
    x_i / V(x_i) is an extreme point of the hull.

    Raises:
        PolytopeBuildError: if every sample is degenerate
    """
    points = (samples if samples is not None else result.samples).to_array()
    values = np.atleast_1d(forward(result.best_params, points))
    keep = values >= eps
    dropped = int((~keep).sum())
    if dropped:
        logger.warning(f"Dropped {dropped} of {len(points)} samples with V(x) < {eps} from the polytope")
    if not keep.any():
        raise PolytopeBuildError(
            f"All {len(points)} samples have V(x) < {eps}; the network is degenerate on the sample set.\n"
            f"Retrain with a different seed or a larger hinge weight."
        )
    return PolytopeNorm.from_generators(points[keep] / values[keep][:, None])


def _gauge(columns: np.ndarray, x: np.ndarray, tol: float) -> float:
    if not np.any(x):
        return 0.0
    try:
        solution = solve_standard_form(np.ones(columns.shape[1]), columns, x, tol=tol)
    except InfeasibleLPError as exc:
        raise UnboundedDirectionError(
            f"Vector {x.tolist()} is outside the cone of the polytope vertices; the gauge is infinite.\n"
            f"The origin is not interior to the polytope (run interior_check)."
        ) from exc
    return solution.objective


def gauge(polytope: PolytopeNorm, x: np.ndarray, tol: float = DEFAULT_TOL) -> float:
    """
    min{λ >= 0 : x ∈ λ·conv(vertices)}, solved as a gauge LP.

    Raises:
        UnboundedDirectionError: if x is not reachable from the vertices
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (polytope.n,):
        raise ShapeError(f"Expected a vector of dimension {polytope.n}, got shape {x.shape}")
    return _gauge(polytope.to_array().T, x, tol)


def interior_check(polytope: PolytopeNorm, tol: float = DEFAULT_TOL) -> bool:
    """True iff every ±e_k has a finite gauge, i.e. the origin is interior."""
    columns = polytope.to_array().T
    for k in range(polytope.n):
        for sign in (1.0, -1.0):
            direction = np.zeros(polytope.n)
            direction[k] = sign
            try:
                _gauge(columns, direction, tol)
            except UnboundedDirectionError:
                return False
    return True


def _one_per_pair(points: np.ndarray) -> np.ndarray:
    """Indices keeping one of each ±v pair (first nonzero coordinate positive)."""
    keep = []
    for index, point in enumerate(points):
        nonzero = np.flatnonzero(point)
        if nonzero.size and point[nonzero[0]] > 0:
            keep.append(index)
    return np.array(keep, dtype=int)


def certified_bound(polytope: PolytopeNorm, matrix_set: MatrixSet, tol: float = DEFAULT_TOL) -> BoundReport:
    """
    Certified upper bound max_i max_v gauge(A_i v) for the polytope norm.

    Only one vertex of each ±v pair is evaluated, since gauge(-y) = gauge(y).

    Raises:
        UnboundedDirectionError: if the origin is not interior to the polytope
    """
    if polytope.n != matrix_set.n:
        raise ShapeError(f"Polytope dimension {polytope.n} differs from matrix dimension {matrix_set.n}")
    if not interior_check(polytope, tol):
        raise UnboundedDirectionError(
            "The polytope does not contain the origin in its interior; its gauge is not a norm.\n"
            "Build it from at least n linearly independent samples."
        )

    started = time.perf_counter()
    points = polytope.to_array()
    columns = points.T
    representatives = _one_per_pair(points)
    best = 0.0
    achieving = (1, int(representatives[0]))
    for i, a in enumerate(matrix_set.arrays()):
        images = points[representatives] @ a.T
        for index, image in zip(representatives, images):
            value = _gauge(columns, image, tol)
            if value > best:
                best = value
                achieving = (i + 1, int(index))
    elapsed = time.perf_counter() - started
    logger.info(
        f"Certified polytope bound {best:.6f} over {len(representatives)} vertex pairs "
        f"and {matrix_set.M} matrices in {elapsed:.2f}s"
    )
    return BoundReport(
        value=best,
        kind=BoundKind.CERTIFIED_UPPER,
        method="polytope",
        wall_time=elapsed,
        meta={
            "vertex_count": polytope.vertex_count,
            "achieving_matrix": achieving[0],
            "achieving_vertex_index": achieving[1],
            "achieving_vertex": points[achieving[1]].tolist(),
        },
    )


__all__ = [
    "build_polytope_norm",
    "gauge",
    "interior_check",
    "certified_bound",
]
