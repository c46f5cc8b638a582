"""
Polytope-norm and linear-programming schemas.
"""

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class PolytopeNorm(BaseModel):
    """
    Symmetric polytope conv{±v_j}, the unit ball of a certified norm.

    Redundant (non-extreme) vertices are allowed; the gauge is computed by LP
    over the full list. Whether the origin is interior is checked separately
    by ``interior_check``.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {"n": 2, "vertices": [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]}
            ]
        },
    )

    n: int = Field(..., description="Dimension", ge=1)

    vertices: list[list[float]] = Field(
        ...,
        description="Vertex list, closed under negation",
        min_length=2,
    )

    @model_validator(mode="after")
    def _symmetric(self) -> "PolytopeNorm":
        if any(len(v) != self.n for v in self.vertices):
            raise ValueError(f"Every vertex must have dimension {self.n}")
        points = self.to_array()
        scale = max(1.0, float(np.abs(points).max()))
        # distance from each -v to its nearest vertex
        gaps = np.linalg.norm(points[None, :, :] + points[:, None, :], axis=2).min(axis=1)
        if gaps.max() > 1e-12 * scale:
            worst = int(gaps.argmax())
            raise ValueError(f"Vertex set is not symmetric: -v for vertex {worst} ({self.vertices[worst]}) is missing")
        return self

    def to_array(self) -> np.ndarray:
        """Vertices as rows, shape (p, n)."""
        return np.array(self.vertices, dtype=float)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @classmethod
    def from_generators(cls, points: Sequence[Sequence[float]]) -> "PolytopeNorm":
        """Polytope conv{±p} for the given generators p."""
        half = np.asarray(points, dtype=float)
        return cls(n=half.shape[1], vertices=np.vstack([half, -half]).tolist())


class GaugeLPProblem(BaseModel):
    """
    min Σθ_j  subject to  Σθ_j v_j = x,  θ ≥ 0.

    The optimal value is the Minkowski gauge of x with respect to conv{v_j}
    when that set is symmetric.
    """

    vertices: list[list[float]] = Field(..., description="Columns v_j, given as rows", min_length=1)
    target: list[float] = Field(..., description="Target vector x", min_length=1)

    @model_validator(mode="after")
    def _dimensions(self) -> "GaugeLPProblem":
        if any(len(v) != len(self.target) for v in self.vertices):
            raise ValueError(f"Vertices and target must share dimension {len(self.target)}")
        return self

    def constraint_matrix(self) -> np.ndarray:
        """Matrix with the vertices as columns, shape (n, p)."""
        return np.array(self.vertices, dtype=float).T


class LPSolution(BaseModel):
    """Optimal basic solution of a standard-form LP."""

    objective: float
    x: list[float]
    basis: list[int] = Field(default_factory=list, description="Indices of basic variables")
    iterations: int = 0
    min_reduced_cost: Optional[float] = Field(
        default=None,
        description="Smallest reduced cost at termination (>= -tol certifies optimality)",
    )
