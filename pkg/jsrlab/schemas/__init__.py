"""
Data contracts shared by every jsrlab module:
- Matrix, MatrixSet, SwitchingWord
- BoundKind, BoundReport, EllipsoidalNorm, TheoryQuery
- NetworkParams, TrainConfig, SampleSet, TrainResult
- PolytopeNorm, GaugeLPProblem, LPSolution
- ExperimentConfig, ReferenceConstants
"""

from jsrlab.schemas.matrix_set import Matrix, MatrixSet, SwitchingWord
from jsrlab.schemas.bounds import (
    BoundKind,
    BoundReport,
    EllipsoidalNorm,
    TheoryQuery,
    NetworkStructureBound,
    VariablesRow,
)
from jsrlab.schemas.network import (
    NetworkParams,
    IncrementStep,
    TrainConfig,
    SampleSet,
    LossEvaluation,
    TracePoint,
    TrainResult,
)
from jsrlab.schemas.polytope import PolytopeNorm, GaugeLPProblem, LPSolution
from jsrlab.schemas.experiment import (
    MethodType,
    ExperimentConfig,
    ReferenceConstants,
    Table1Row,
    BenchmarkEntry,
)

__all__ = [
    # Matrix sets
    "Matrix",
    "MatrixSet",
    "SwitchingWord",
    # Bounds and theory
    "BoundKind",
    "BoundReport",
    "EllipsoidalNorm",
    "TheoryQuery",
    "NetworkStructureBound",
    "VariablesRow",
    # Neural
    "NetworkParams",
    "IncrementStep",
    "TrainConfig",
    "SampleSet",
    "LossEvaluation",
    "TracePoint",
    "TrainResult",
    # Polytope
    "PolytopeNorm",
    "GaugeLPProblem",
    "LPSolution",
    # Experiments
    "MethodType",
    "ExperimentConfig",
    "ReferenceConstants",
    "Table1Row",
    "BenchmarkEntry",
]
