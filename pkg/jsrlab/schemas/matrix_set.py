"""
Matrix-set data model for switched linear systems x_{k+1} = A_{σ(k)} x_k.

Serialized form of a MatrixSet (used by config files and reports):
    {"n": 2, "matrices": [[[a11, a12], [a21, a22]], ...]}
"""

import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from jsrlab.errors import NumericError


def _check_finite(rows: Sequence[Sequence[float]], label: str) -> None:
    for row in rows:
        for value in row:
            if not math.isfinite(value):
                raise NumericError(
                    f"{label} contains a non-finite entry ({value}).\n"
                    f"All matrix entries must be finite reals."
                )


class Matrix(BaseModel):
    """Dense real square matrix, row-major."""

    model_config = ConfigDict(frozen=True)

    entries: list[list[float]] = Field(
        ...,
        description="Row-major entries of a square matrix",
        min_length=1,
    )

    @field_validator("entries")
    @classmethod
    def _square_and_finite(cls, entries: list[list[float]]) -> list[list[float]]:
        size = len(entries)
        if any(len(row) != size for row in entries):
            raise ValueError(f"Matrix must be square; got {size} rows of lengths {[len(r) for r in entries]}")
        _check_finite(entries, "Matrix")
        return entries

    @property
    def n(self) -> int:
        return len(self.entries)

    def to_array(self) -> np.ndarray:
        return np.array(self.entries, dtype=float)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "Matrix":
        return cls(entries=np.asarray(array, dtype=float).tolist())


class SwitchingWord(BaseModel):
    """
    Finite switching sequence σ = (σ(1), ..., σ(k)) with 1-based matrix indices.

    Range checking against a concrete MatrixSet happens in ``product_of_word``.
    """

    model_config = ConfigDict(frozen=True)

    indices: list[int] = Field(
        ...,
        description="1-based indices into a MatrixSet",
        min_length=1,
    )

    def __len__(self) -> int:
        return len(self.indices)


class MatrixSet(BaseModel):
    """
    Finite set Σ = {A_1, ..., A_M} of n×n real matrices.

    Matrices keep their order; index i in a SwitchingWord refers to
    ``matrices[i - 1]``.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {
                    "n": 2,
                    "matrices": [
                        [[1.5519, 0.4474], [7.6412, 7.4716]],
                        [[0.4750, 9.1755], [1.8955, 0.1850]],
                    ],
                    "name": "sigma2",
                }
            ]
        },
    )

    n: int = Field(..., description="Shared dimension of every matrix", ge=1)

    matrices: list[list[list[float]]] = Field(
        ...,
        description="Row-major matrices A_1..A_M",
        min_length=1,
    )

    name: Optional[str] = Field(
        default=None,
        description="Registry name, when the set comes from the benchmark registry",
    )

    @model_validator(mode="after")
    def _shared_dimension(self) -> "MatrixSet":
        for position, rows in enumerate(self.matrices, start=1):
            if len(rows) != self.n or any(len(row) != self.n for row in rows):
                raise ValueError(
                    f"Matrix A_{position} is not {self.n}x{self.n}; "
                    f"every member of the set must share dimension n={self.n}"
                )
            _check_finite(rows, f"Matrix A_{position}")
        return self

    @property
    def M(self) -> int:
        return len(self.matrices)

    def arrays(self) -> np.ndarray:
        """Stacked matrices, shape (M, n, n)."""
        return np.array(self.matrices, dtype=float)

    def matrix(self, index: int) -> Matrix:
        """Return A_index (1-based)."""
        return Matrix(entries=self.matrices[index - 1])

    def scaled(self, factor: float) -> "MatrixSet":
        """The set {factor·A_i}."""
        return MatrixSet.from_arrays(factor * self.arrays())

    @classmethod
    def from_arrays(cls, arrays: Sequence[np.ndarray], name: Optional[str] = None) -> "MatrixSet":
        stacked = np.asarray(arrays, dtype=float)
        if stacked.ndim != 3 or stacked.shape[1] != stacked.shape[2]:
            raise ValueError(f"Expected a stack of square matrices, got shape {stacked.shape}")
        return cls(n=stacked.shape[1], matrices=stacked.tolist(), name=name)

    def to_json_dict(self) -> dict:
        return self.model_dump(exclude_none=True)
