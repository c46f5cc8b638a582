"""
Experiment configuration and reference-constant schemas.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from jsrlab.schemas.matrix_set import MatrixSet


class MethodType(str, Enum):
    """Operations the harness can dispatch to."""
    NEURAL = "neural"
    ELLIPSOID = "ellipsoid"
    LOWER = "lower"
    CERTIFY = "certify"
    THEORY = "theory"


class ExperimentConfig(BaseModel):
    """
    One experiment: a benchmark, a method and its parameter block.

    ``benchmark`` is either a registry name (``sigma2``, ``sigma8``,
    ``family:<n>``) or an inline MatrixSet.
    """

    benchmark: Union[str, MatrixSet] = Field(
        ...,
        description="Registry name or inline MatrixSet",
    )

    method: MethodType = Field(..., description="Operation to run")

    params: dict[str, Any] = Field(
        default_factory=dict,
        description="Method-specific parameters",
    )

    output: Optional[Path] = Field(
        default=None,
        description="Report path (JSON); a Markdown summary is written beside it",
    )

    seed_base: int = Field(default=0, description="First seed of the seed range", ge=0)

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {"benchmark": "sigma2", "method": "ellipsoid", "params": {"restarts": 10, "iters": 3000}},
                {"benchmark": "sigma8", "method": "lower", "params": {"max_len": 6}},
                {
                    "benchmark": "sigma2",
                    "method": "neural",
                    "params": {"hidden_layers": 1, "width": 10, "n_samples": 500, "n_seeds": 20},
                    "output": "results/sigma2_nn.json",
                    "seed_base": 0,
                },
            ]
        }
    )


class ReferenceConstants(BaseModel):
    """Published JSR values for a benchmark. Never computed by jsrlab."""

    model_config = ConfigDict(frozen=True)

    jsr: Optional[float] = Field(default=None, description="Known joint spectral radius")
    rho_Q: Optional[float] = Field(default=None, description="Published ellipsoidal approximation")
    rho_SOS4: Optional[float] = Field(default=None, description="Published degree-4 SOS approximation")
    citation: str = Field(default="", description="Where the values come from")


class Table1Row(BaseModel):
    """Published neural-approximation statistics for one architecture."""

    model_config = ConfigDict(frozen=True)

    k: int = Field(..., ge=1)
    m: int = Field(..., ge=1)
    best: float
    mean: float
    std: float


class BenchmarkEntry(BaseModel):
    """Registry metadata for a named benchmark."""

    model_config = ConfigDict(frozen=True)

    name: str
    description: str = ""
    references: Optional[ReferenceConstants] = None
    table1: list[Table1Row] = Field(default_factory=list)
