"""
Neural Lyapunov schemas: network snapshots, training configuration and results.

NetworkParams is the portable (JSON) form of a bias-free ReLU network

    V(x) = w_out · σ(W_k · σ(... σ(W_1 x)))

with σ the component-wise ReLU. Weight matrix W_j maps the width-n_{j-1}
layer to the width-n_j layer, so it is stored with n_j rows and n_{j-1}
columns. No bias parameters exist, which makes V positively homogeneous.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class NetworkParams(BaseModel):
    """Weights of a homogeneous ReLU network with a scalar output."""

    model_config = ConfigDict(frozen=True)

    layers: list[list[list[float]]] = Field(
        ...,
        description="Hidden weight matrices W_1..W_k, each n_j x n_{j-1}, row-major",
        min_length=1,
    )

    output: list[float] = Field(
        ...,
        description="Output row w_out (length n_k); nonnegative for a valid Lyapunov candidate",
        min_length=1,
    )

    @model_validator(mode="after")
    def _chained_dimensions(self) -> "NetworkParams":
        previous = None
        for j, rows in enumerate(self.layers, start=1):
            if not rows or not rows[0]:
                raise ValueError(f"Layer {j} is empty")
            width_in = len(rows[0])
            if any(len(row) != width_in for row in rows):
                raise ValueError(f"Layer {j} is ragged")
            if previous is not None and width_in != previous:
                raise ValueError(f"Layer {j} expects {width_in} inputs but layer {j - 1} has {previous} outputs")
            previous = len(rows)
        if len(self.output) != previous:
            raise ValueError(f"Output row has {len(self.output)} entries; last hidden layer has {previous} neurons")
        return self

    @computed_field
    @property
    def dims(self) -> list[int]:
        """Layer widths [n_0, n_1, ..., n_k]."""
        return [len(self.layers[0][0])] + [len(rows) for rows in self.layers]

    @property
    def input_dim(self) -> int:
        return len(self.layers[0][0])

    def layer_arrays(self) -> list[np.ndarray]:
        return [np.array(rows, dtype=float) for rows in self.layers]

    def output_array(self) -> np.ndarray:
        return np.array(self.output, dtype=float)

    @property
    def is_output_nonnegative(self) -> bool:
        return all(w >= 0 for w in self.output)


class IncrementStep(BaseModel):
    """Add ``count`` fresh sphere samples at the end of ``epoch``."""

    epoch: int = Field(..., ge=1)
    count: int = Field(..., ge=1)


class TrainConfig(BaseModel):
    """
    Training configuration for ρ_NN(k, m).

    Defaults reproduce the 500-sample experiments on a laptop CPU within a
    few seconds per seed.
    """

    hidden_layers: int = Field(default=1, description="Number of hidden layers k", ge=1)
    width: int = Field(default=10, description="Neurons per hidden layer m", ge=1)
    n_samples: int = Field(default=500, description="Final sample-set size", ge=1)
    n_seeds: int = Field(default=20, description="Independent seeds per campaign", ge=1)
    epochs: int = Field(default=1500, description="Full-batch optimizer steps", ge=1)

    learning_rate: float = Field(default=0.02, gt=0)
    lr_decay: float = Field(default=0.998, description="Multiplicative step-size decay per epoch", gt=0, le=1)
    eval_every: int = Field(default=5, description="Epochs between exact-loss evaluations", ge=1)

    l1_coeff: float = Field(default=0.0, description="L1 penalty on all weights (0 disables)", ge=0)
    incremental: Optional[list[IncrementStep]] = Field(
        default=None,
        description="Sample-growth schedule; the initial set holds n_samples minus the scheduled additions",
    )

    ratio_epsilon: float = Field(default=1e-6, description="Floor for V(x) in the loss ratio", gt=0)
    hinge_weight: float = Field(default=1.0, description="Penalty weight pushing V(x) above ratio_epsilon", ge=0)
    temperature_start: float = Field(default=0.05, description="Initial log-sum-exp temperature, relative to the loss", gt=0)
    temperature_end: float = Field(default=1e-4, description="Final log-sum-exp temperature, relative to the loss", gt=0)

    time_budget: Optional[float] = Field(default=None, description="Wall-clock budget per seed in seconds", gt=0)

    @model_validator(mode="after")
    def _schedule_fits(self) -> "TrainConfig":
        if self.incremental:
            if self.initial_samples < 1:
                raise ValueError(
                    f"Incremental schedule adds {self.n_samples - self.initial_samples} points "
                    f"but n_samples is {self.n_samples}; at least one initial point is required"
                )
            late = [step.epoch for step in self.incremental if step.epoch > self.epochs]
            if late:
                raise ValueError(
                    f"Incremental steps at epochs {late} never fire: training stops after epoch {self.epochs}.\n"
                    f"Schedule every step at or before the last epoch."
                )
        return self

    @property
    def initial_samples(self) -> int:
        if not self.incremental:
            return self.n_samples
        return self.n_samples - sum(step.count for step in self.incremental)

    def with_default_incremental(self) -> "TrainConfig":
        """Start at 20% of n_samples and add 20% every epochs/5 epochs."""
        chunk = self.n_samples // 5
        every = max(1, self.epochs // 5)
        if chunk < 1:
            return self
        schedule = [IncrementStep(epoch=min(every * i, self.epochs), count=chunk) for i in range(1, 5)]
        return self.model_validate({**self.model_dump(), "incremental": schedule})


class SampleSet(BaseModel):
    """Points on the unit sphere S^{n-1}."""

    model_config = ConfigDict(frozen=True)

    points: list[list[float]] = Field(..., description="Unit vectors", min_length=1)

    @field_validator("points")
    @classmethod
    def _unit_norm(cls, points: list[list[float]]) -> list[list[float]]:
        size = len(points[0])
        for i, point in enumerate(points):
            if len(point) != size:
                raise ValueError(f"Sample {i} has dimension {len(point)}, expected {size}")
            norm = math.sqrt(sum(v * v for v in point))
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"Sample {i} has Euclidean norm {norm!r}; samples must lie on the unit sphere")
        return points

    @property
    def n(self) -> int:
        return len(self.points[0])

    def __len__(self) -> int:
        return len(self.points)

    def to_array(self) -> np.ndarray:
        return np.array(self.points, dtype=float)

    @classmethod
    def from_array(cls, array: np.ndarray) -> "SampleSet":
        return cls(points=np.asarray(array, dtype=float).tolist())


class LossEvaluation(BaseModel):
    """Exact sample loss max_{i,x} V(A_i x) / max(V(x), eps) with diagnostics."""

    value: float
    degenerate_count: int = Field(..., description="Samples with V(x) < eps")
    argmax_matrix: int = Field(..., description="1-based index of the maximizing matrix")
    argmax_sample: int = Field(..., description="0-based index of the maximizing sample")


class TracePoint(BaseModel):
    """Exact loss observed at an evaluation epoch."""

    wall_time: float = Field(..., ge=0)
    loss: float
    epoch: int = Field(..., ge=0)
    sample_count: int = Field(..., ge=1)
    event: Optional[str] = None


class TrainResult(BaseModel):
    """Outcome of one training run (one seed)."""

    seed: int
    best_loss: float = Field(..., description="ρ_NN(k,m)(Σ): lowest exact loss on the current sample set")
    best_params: NetworkParams
    trace: list[TracePoint] = Field(default_factory=list)
    samples: SampleSet = Field(..., description="Sample set at the end of training")
    epochs_run: int = 0
    wall_time: float = 0.0
    events: list[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def _best_is_trace_minimum(self) -> "TrainResult":
        current = [p.loss for p in self.trace if p.sample_count == len(self.samples)]
        if current and abs(min(current) - self.best_loss) > 1e-12 * max(1.0, abs(self.best_loss)):
            raise ValueError(
                f"best_loss {self.best_loss} differs from the trace minimum {min(current)} "
                f"on the final sample set"
            )
        return self
