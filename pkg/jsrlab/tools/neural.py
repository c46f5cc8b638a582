"""
Neural Lyapunov functions for the JSR.

A bias-free ReLU network V with nonnegative output weights is trained so that
the sample loss

    L(V, S) = max_i max_{x ∈ S} V(A_i x) / V(x)

is as small as possible; the lowest exact loss seen during training is the
empirical estimate ρ_NN(k, m). Because S is finite this value is not a bound:
it can fall below the true JSR (overfitting).

Training minimizes a smooth surrogate of L (temperature-scaled log-sum-exp
over every ratio, annealed toward the hard max) with Adam on CPU in float64,
projecting the output layer onto the nonnegative orthant after every step.
The reported loss is always the exact hard max.
"""

import logging
import math
import time
from typing import Optional, Union

import numpy as np
import torch
from torch import nn

from jsrlab.errors import DomainError, ShapeError
from jsrlab.schemas.matrix_set import MatrixSet
from jsrlab.schemas.network import (
    LossEvaluation,
    NetworkParams,
    SampleSet,
    TracePoint,
    TrainConfig,
    TrainResult,
)

logger = logging.getLogger(__name__)

SamplesLike = Union[SampleSet, np.ndarray]


# ============================================================================
# Network
# ============================================================================

class HomogeneousReLUNet(nn.Module):
    """Fully connected ReLU network without biases and a scalar output."""

    def __init__(
        self,
        input_dim: int,
        width: int,
        hidden_layers: int = 1,
        generator: Optional[torch.Generator] = None,
    ):
        super().__init__()
        dims = [input_dim] + [width] * hidden_layers
        self.hidden = nn.ModuleList(
            nn.Linear(d_in, d_out, bias=False, dtype=torch.float64)
            for d_in, d_out in zip(dims[:-1], dims[1:])
        )
        self.output = nn.Linear(width, 1, bias=False, dtype=torch.float64)
        self.reset_parameters(generator)

    def reset_parameters(self, generator: Optional[torch.Generator] = None) -> None:
        """Hidden weights ~ N(0, 1/fan_in); output weights = |N(0, 1/fan_in)|."""
        with torch.no_grad():
            for layer in self.hidden:
                fan_in = layer.weight.shape[1]
                draw = torch.randn(layer.weight.shape, generator=generator, dtype=torch.float64)
                layer.weight.copy_(draw / math.sqrt(fan_in))
            fan_in = self.output.weight.shape[1]
            draw = torch.randn(self.output.weight.shape, generator=generator, dtype=torch.float64)
            self.output.weight.copy_(draw.abs() / math.sqrt(fan_in))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = x
        for layer in self.hidden:
            h = torch.relu(layer(h))
        return self.output(h).squeeze(-1)

    def project_output_nonneg_(self) -> None:
        with torch.no_grad():
            self.output.weight.clamp_(min=0.0)

    def to_params(self) -> NetworkParams:
        return NetworkParams(
            layers=[layer.weight.detach().tolist() for layer in self.hidden],
            output=self.output.weight.detach()[0].tolist(),
        )

    @classmethod
    def from_params(cls, params: NetworkParams) -> "HomogeneousReLUNet":
        dims = params.dims
        if len(set(dims[1:])) != 1:
            raise ShapeError(f"HomogeneousReLUNet needs equal hidden widths, got {dims[1:]}")
        net = cls(dims[0], dims[1], len(dims) - 1)
        with torch.no_grad():
            for layer, weights in zip(net.hidden, params.layer_arrays()):
                layer.weight.copy_(torch.as_tensor(weights))
            net.output.weight.copy_(torch.as_tensor(params.output_array()).unsqueeze(0))
        return net


# ============================================================================
# Pure evaluation (numpy)
# ============================================================================

def _draw_sphere(rng: np.random.Generator, n: int, count: int) -> np.ndarray:
    points = rng.standard_normal((count, n))
    norms = np.linalg.norm(points, axis=1)
    while np.any(norms < 1e-300):
        bad = norms < 1e-300
        points[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.linalg.norm(points, axis=1)
    return points / norms[:, None]


def sample_sphere(n: int, count: int, seed: int) -> SampleSet:
    """``count`` i.i.d. uniform points on S^{n-1} (normalized Gaussians)."""
    if n < 1 or count < 1:
        raise DomainError(f"n and count must be >= 1 (got n={n}, count={count})")
    return SampleSet.from_array(_draw_sphere(np.random.default_rng(seed), n, count))


def _values(layers: list[np.ndarray], output: np.ndarray, x: np.ndarray) -> np.ndarray:
    h = x
    for weights in layers:
        h = np.maximum(h @ weights.T, 0.0)
    return h @ output


def forward(params: NetworkParams, x: np.ndarray) -> Union[float, np.ndarray]:
    """
    V(x) for a single vector (returns float) or a batch of rows (returns array).

    Raises:
        ShapeError: if x does not have params.input_dim components
    """
    x = np.asarray(x, dtype=float)
    if x.ndim == 0 or x.shape[-1] != params.input_dim:
        raise ShapeError(f"Network expects {params.input_dim}-dimensional inputs, got shape {x.shape}")
    values = _values(params.layer_arrays(), params.output_array(), x)
    return float(values) if x.ndim == 1 else values


def _samples_array(samples: SamplesLike) -> np.ndarray:
    points = samples.to_array() if isinstance(samples, SampleSet) else np.asarray(samples, dtype=float)
    if points.ndim != 2 or points.shape[0] == 0:
        raise DomainError("Loss needs a nonempty sample set")
    return points


def evaluate_loss(
    params: NetworkParams,
    samples: SamplesLike,
    matrix_set: MatrixSet,
    eps: float = 1e-6,
) -> LossEvaluation:
    """
    Exact loss max_{i, x} V(A_i x) / max(V(x), eps) with its argmax and the
    number of degenerate samples (V(x) < eps).
    """
    if eps <= 0:
        raise DomainError(f"eps must be positive (got {eps})")
    points = _samples_array(samples)
    if points.shape[1] != params.input_dim:
        raise ShapeError(f"Samples have dimension {points.shape[1]}, network expects {params.input_dim}")
    layers = params.layer_arrays()
    output = params.output_array()

    base = _values(layers, output, points)
    images = np.einsum("mij,nj->mni", matrix_set.arrays(), points)
    mapped = _values(layers, output, images)
    ratios = mapped / np.maximum(base, eps)[None, :]
    i, j = np.unravel_index(int(np.argmax(ratios)), ratios.shape)
    return LossEvaluation(
        value=float(ratios[i, j]),
        degenerate_count=int(np.sum(base < eps)),
        argmax_matrix=int(i) + 1,
        argmax_sample=int(j),
    )


def loss(params: NetworkParams, samples: SamplesLike, matrix_set: MatrixSet, eps: float = 1e-6) -> float:
    """Exact sample loss max_{i, x} V(A_i x) / max(V(x), eps)."""
    return evaluate_loss(params, samples, matrix_set, eps).value


def project_output_nonneg(params: NetworkParams) -> NetworkParams:
    """Clamp the output row at zero; hidden layers are untouched."""
    return params.model_copy(update={"output": [max(w, 0.0) for w in params.output]})


# ============================================================================
# Training
# ============================================================================

def surrogate_loss(
    net: HomogeneousReLUNet,
    samples: torch.Tensor,
    matrices: torch.Tensor,
    temperature: float,
    eps: float,
    hinge_weight: float = 1.0,
    l1_coeff: float = 0.0,
) -> torch.Tensor:
    """
    Differentiable surrogate of the sample loss:

        T·logsumexp(r / T) + β·Σ_x max(0, eps - V(x)) + λ·Σ|w|

    with r the M·N ratios V(A_i x) / max(V(x), eps).
    """
    base = net(samples)
    images = torch.einsum("mij,nj->mni", matrices, samples)
    ratios = (net(images) / torch.clamp(base, min=eps)).reshape(-1)
    value = temperature * torch.logsumexp(ratios / temperature, dim=0)
    if hinge_weight > 0:
        value = value + hinge_weight * torch.relu(eps - base).sum()
    if l1_coeff > 0:
        value = value + l1_coeff * sum(p.abs().sum() for p in net.parameters())
    return value


def _temperature(config: TrainConfig, epoch: int) -> float:
    if config.epochs <= 1:
        return config.temperature_end
    fraction = (epoch - 1) / (config.epochs - 1)
    return config.temperature_start * (config.temperature_end / config.temperature_start) ** fraction


def train(config: TrainConfig, matrix_set: MatrixSet, seed: int) -> TrainResult:
    """
    Train one network and return ρ_NN(k, m) for this seed.

    Every ``eval_every`` epochs the exact loss on the current sample set is
    recorded in the trace; the best value and its parameters are kept. When an
    incremental schedule is configured, fresh sphere samples are appended at
    the scheduled epochs and the stored best parameters are re-evaluated on
    the enlarged set, so best_loss always refers to the current samples.

    A non-finite surrogate or loss reinitializes the network (recorded in
    ``events`` and in the trace). Exceeding ``time_budget`` stops training and
    returns the best result so far.
    """
    started = time.monotonic()
    n = matrix_set.n
    eps = config.ratio_epsilon
    rng = np.random.default_rng(seed)
    generator = torch.Generator().manual_seed(seed)

    points = _draw_sphere(rng, n, config.initial_samples)
    matrices = torch.as_tensor(matrix_set.arrays())
    schedule: dict[int, int] = {}
    for step in config.incremental or []:
        schedule[step.epoch] = schedule.get(step.epoch, 0) + step.count

    net = HomogeneousReLUNet(n, config.width, config.hidden_layers, generator)

    def fresh_optimizer():
        optimizer = torch.optim.Adam(net.parameters(), lr=config.learning_rate)
        return optimizer, torch.optim.lr_scheduler.ExponentialLR(optimizer, gamma=config.lr_decay)

    optimizer, scheduler = fresh_optimizer()
    trace: list[TracePoint] = []
    events: list[str] = []

    def elapsed() -> float:
        return time.monotonic() - started

    params = net.to_params()
    current = loss(params, points, matrix_set, eps)
    trace.append(TracePoint(wall_time=elapsed(), loss=current, epoch=0, sample_count=len(points)))
    best_loss, best_params = current, params

    epoch = 0
    for epoch in range(1, config.epochs + 1):
        temperature = _temperature(config, epoch) * max(current, 1e-12)
        optimizer.zero_grad()
        value = surrogate_loss(
            net,
            torch.as_tensor(points),
            matrices,
            temperature,
            eps,
            config.hinge_weight,
            config.l1_coeff,
        )
        stepped = bool(torch.isfinite(value))
        if stepped:
            value.backward()
            optimizer.step()
            scheduler.step()
            net.project_output_nonneg_()
        else:
            message = f"epoch {epoch}: non-finite surrogate, network reinitialized"
            logger.warning(f"seed {seed}: {message}")
            events.append(message)
            net.reset_parameters(generator)
            optimizer, scheduler = fresh_optimizer()

        if stepped and (epoch % config.eval_every == 0 or epoch == config.epochs):
            params = net.to_params()
            evaluation = evaluate_loss(params, points, matrix_set, eps)
            if not math.isfinite(evaluation.value):
                message = f"epoch {epoch}: non-finite loss, network reinitialized"
                logger.warning(f"seed {seed}: {message}")
                events.append(message)
                net.reset_parameters(generator)
                optimizer, scheduler = fresh_optimizer()
            else:
                current = evaluation.value
                trace.append(
                    TracePoint(wall_time=elapsed(), loss=current, epoch=epoch, sample_count=len(points))
                )
                if current < best_loss:
                    best_loss, best_params = current, params
                logger.debug(
                    f"seed {seed} epoch {epoch}: loss {current:.6f} (best {best_loss:.6f}, "
                    f"degenerate {evaluation.degenerate_count})"
                )

        if epoch in schedule:
            points = np.vstack([points, _draw_sphere(rng, n, schedule[epoch])])
            best_loss = loss(best_params, points, matrix_set, eps)
            current = best_loss
            message = f"samples enlarged to {len(points)}"
            events.append(f"epoch {epoch}: {message}")
            trace.append(
                TracePoint(
                    wall_time=elapsed(),
                    loss=best_loss,
                    epoch=epoch,
                    sample_count=len(points),
                    event=message,
                )
            )

        if config.time_budget is not None and elapsed() > config.time_budget:
            message = f"epoch {epoch}: time budget of {config.time_budget}s exhausted"
            logger.warning(f"seed {seed}: {message}")
            events.append(message)
            break

    wall_time = elapsed()
    logger.info(
        f"seed {seed}: best loss {best_loss:.6f} after {epoch} epochs in {wall_time:.1f}s "
        f"({len(points)} samples)"
    )
    return TrainResult(
        seed=seed,
        best_loss=best_loss,
        best_params=best_params,
        trace=trace,
        samples=SampleSet.from_array(points),
        epochs_run=epoch,
        wall_time=wall_time,
        events=events,
    )


__all__ = [
    "HomogeneousReLUNet",
    "sample_sphere",
    "forward",
    "evaluate_loss",
    "loss",
    "project_output_nonneg",
    "surrogate_loss",
    "train",
]
