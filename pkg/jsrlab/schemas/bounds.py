"""
Bound and theory schemas.

BoundReport is the common currency of every JSR estimate in jsrlab: product
lower bounds, ellipsoidal and polytope upper bounds, and empirical neural
losses all flow into it.
"""

from enum import Enum
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class BoundKind(str, Enum):
    """Interpretation of a JSR estimate."""
    LOWER = "lower"  # value <= ρ(Σ) provably
    CERTIFIED_UPPER = "certified-upper"  # value >= ρ(Σ) provably
    EMPIRICAL = "empirical"  # no guarantee


class BoundReport(BaseModel):
    """A named JSR estimate with provenance."""

    value: float = Field(
        ...,
        description="Estimate of ρ(Σ)",
        ge=0,
    )

    kind: BoundKind = Field(
        ...,
        description="lower / certified-upper / empirical",
    )

    method: str = Field(
        ...,
        description="Label of the producing method (e.g. 'products', 'ellipsoid', 'polytope')",
    )

    wall_time: float = Field(
        default=0.0,
        description="Computation time in seconds",
        ge=0,
    )

    meta: dict[str, Any] = Field(
        default_factory=dict,
        description="Method details (achieving word, iterations, warnings, ...)",
    )

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "value": 8.6871,
                    "kind": "lower",
                    "method": "products",
                    "wall_time": 0.41,
                    "meta": {"max_length": 12, "word": [1, 1, 2], "words_evaluated": 8190},
                }
            ]
        }
    )


class EllipsoidalNorm(BaseModel):
    """
    Ellipsoidal norm ‖x‖_P = √(xᵀPx) stored through its Cholesky-like factor.

    P = L·Lᵀ with L lower triangular and strictly positive diagonal, which
    makes P positive definite by construction.
    """

    model_config = ConfigDict(frozen=True)

    factor: list[list[float]] = Field(
        ...,
        description="Lower-triangular factor L (row-major)",
        min_length=1,
    )

    @field_validator("factor")
    @classmethod
    def _lower_triangular_positive(cls, factor: list[list[float]]) -> list[list[float]]:
        size = len(factor)
        if any(len(row) != size for row in factor):
            raise ValueError("Factor L must be square")
        for i, row in enumerate(factor):
            if row[i] <= 0:
                raise ValueError(f"Factor L must have a strictly positive diagonal; L[{i}][{i}] = {row[i]}")
            if any(value != 0.0 for value in row[i + 1:]):
                raise ValueError(f"Factor L must be lower triangular; row {i} has entries above the diagonal")
        return factor

    @property
    def n(self) -> int:
        return len(self.factor)

    def to_array(self) -> np.ndarray:
        return np.array(self.factor, dtype=float)

    def gram(self) -> np.ndarray:
        """The positive definite matrix P = L·Lᵀ."""
        lower = self.to_array()
        return lower @ lower.T

    def vector_norm(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(self.to_array().T @ np.asarray(x, dtype=float)))

    def induced_norm(self, matrix: np.ndarray) -> float:
        """‖A‖_P, the largest singular value of Lᵀ·A·L⁻ᵀ."""
        lower = self.to_array()
        inverse_t = np.linalg.inv(lower).T
        return float(np.linalg.norm(lower.T @ np.asarray(matrix, dtype=float) @ inverse_t, 2))


class TheoryQuery(BaseModel):
    """Parameters for the closed-form guarantee calculators."""

    n: int = Field(..., description="State dimension", ge=1)

    tau: Optional[float] = Field(
        default=None,
        description="Target precision τ (> 1 for Barvinok queries)",
    )

    d: Optional[int] = Field(
        default=None,
        description="SOS half-degree",
        ge=1,
    )

    k: Optional[int] = Field(
        default=None,
        description="Barvinok parameter",
        ge=1,
    )

    @model_validator(mode="after")
    def _tau_above_one(self) -> "TheoryQuery":
        if self.tau is not None and self.tau <= 1:
            raise ValueError(f"tau must exceed 1 (got {self.tau})")
        return self


class NetworkStructureBound(BaseModel):
    """Depth and width bounds for a ReLU network reaching precision τ."""

    n: int
    tau: float
    depth: int = Field(..., description="⌈log₂(n+1)⌉ + 1")
    k_tau: int = Field(..., description="Smallest Barvinok parameter for τ")
    vertex_budget: int = Field(..., description="D_n^τ = 8·D(n, k_τ)")
    face_count: int = Field(..., description="McMullen face bound at D_n^τ vertices (width base)")
    width_exponent: int = Field(..., description="2n² + 3n + 1")
    log10_width: float = Field(..., description="log₁₀ of face_count ** width_exponent")


class VariablesRow(BaseModel):
    """One row of the CPWL-versus-SOS variable-count comparison."""

    n: int
    d: int
    tau: float
    k_tau: int
    cpwl_vars: int
    sos_vars: int
