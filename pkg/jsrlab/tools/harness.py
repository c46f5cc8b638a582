"""
Experiment harness: configuration loading, method dispatch, worker fan-out
and the report / CSV writers behind the CLI.

Reports keep computed values and published reference values in separate
sections; CSV outputs keep them in separate ``ref_*`` columns.
"""

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Optional, Sequence, Union

import numpy as np
import pandas as pd
import torch
import yaml
from pydantic import ValidationError

from jsrlab.errors import ConfigError, DomainError, JSRLabError
from jsrlab.schemas.bounds import BoundKind, BoundReport, TheoryQuery
from jsrlab.schemas.experiment import ExperimentConfig, MethodType
from jsrlab.schemas.matrix_set import MatrixSet
from jsrlab.schemas.network import NetworkParams, SampleSet, TrainConfig, TrainResult
from jsrlab.tools import bounds, neural, polytope, theory
from jsrlab.tools.registry import available_benchmarks, get_entry, reference_constants, resolve_benchmark
from jsrlab.tools.report_templates import get_template_manager
from jsrlab.tools.settings import get_runtime_config

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
SUMMARY_TEMPLATE_ID = "report.summary.v1"
TABLE1_ARCHITECTURES = [(k, m) for k in (1, 2, 3) for m in (5, 10)]
TABLE1_COLUMNS = ["k", "m", "best", "mean", "std", "status", "ref_best", "ref_mean", "ref_std"]
TRACE_COLUMNS = ["seed", "wall_time", "epoch", "sample_count", "loss", "best_so_far", "event"]
BAND_COLUMNS = ["wall_time", "mean", "min", "max", "seeds"]
FIG1_COLUMNS = ["n", "cpwl_vars", "sos_vars", "tau"]

CERTIFY_TRAIN_DEFAULTS = {"hidden_layers": 2, "width": 10, "n_samples": 100, "n_seeds": 1}

_METHOD_PARAMS = {
    MethodType.LOWER: {"max_len", "cap", "prune"},
    MethodType.ELLIPSOID: {"restarts", "iters", "seed", "step", "final_step"},
    MethodType.NEURAL: set(TrainConfig.model_fields) | {"workers"},
    MethodType.CERTIFY: {"network", "samples", "train", "seed", "eps"},
    MethodType.THEORY: {"n", "tau", "d", "k", "ceiling", "upper"},
}


# ============================================================================
# Configuration
# ============================================================================

def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Read an ExperimentConfig from a JSON or YAML file.

    Raises:
        ConfigError: missing file, unparsable content or invalid fields
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"Could not parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must hold a mapping at the top level")
    return parse_experiment_config(data)


def parse_experiment_config(data: dict[str, Any]) -> ExperimentConfig:
    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(
            f"Invalid experiment config:\n{exc}\n"
            f"Methods: {', '.join(m.value for m in MethodType)}\n"
            f"Benchmarks: {', '.join(available_benchmarks())}"
        ) from exc
    resolve_benchmark(config.benchmark)
    unknown = set(config.params) - _METHOD_PARAMS[config.method]
    if unknown:
        raise ConfigError(
            f"Unknown parameters for method '{config.method.value}': {sorted(unknown)}\n"
            f"Allowed: {sorted(_METHOD_PARAMS[config.method])}"
        )
    return config


def build_train_config(params: dict[str, Any], defaults: Optional[dict[str, Any]] = None) -> TrainConfig:
    """
    TrainConfig from a parameter block.

    ``incremental: true`` selects the default 20%-chunk schedule; a list is
    taken as an explicit schedule.
    """
    values = dict(defaults or {})
    values.update({key: value for key, value in params.items() if key in TrainConfig.model_fields})
    incremental = values.pop("incremental", None)
    try:
        if incremental is True:
            return TrainConfig(**values).with_default_incremental()
        if incremental in (None, False):
            return TrainConfig(**values)
        return TrainConfig(**values, incremental=incremental)
    except ValidationError as exc:
        raise ConfigError(f"Invalid training parameters:\n{exc}") from exc


# ============================================================================
# Worker pool
# ============================================================================

def _init_worker() -> None:
    torch.set_num_threads(1)


def _train_job(matrix_set: MatrixSet, config: TrainConfig, seed: int) -> TrainResult:
    return neural.train(config, matrix_set, seed)


def run_training_jobs(
    jobs: Sequence[tuple[MatrixSet, TrainConfig, int]],
    workers: Optional[int] = None,
) -> list[Union[TrainResult, BaseException]]:
    """
    Train every (matrix set, config, seed) job, in order.

    A failing job yields its exception in place of a result. With one worker
    everything runs in-process.
    """
    if workers is None:
        workers = get_runtime_config()["workers"]
    workers = max(1, min(workers, len(jobs) or 1))
    outcomes: list[Union[TrainResult, BaseException]] = []
    if workers == 1:
        for job in jobs:
            try:
                outcomes.append(_train_job(*job))
            except (JSRLabError, RuntimeError, ValueError) as exc:
                logger.error(f"Training seed {job[2]} failed: {exc}")
                outcomes.append(exc)
        return outcomes

    logger.info(f"Training {len(jobs)} jobs on {workers} worker processes")
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker) as executor:
        futures = [executor.submit(_train_job, *job) for job in jobs]
        for job, future in zip(jobs, futures):
            try:
                outcomes.append(future.result())
            except (JSRLabError, RuntimeError, ValueError) as exc:
                logger.error(f"Training seed {job[2]} failed: {exc}")
                outcomes.append(exc)
    return outcomes


def train_seeds(
    matrix_set: MatrixSet,
    config: TrainConfig,
    seeds: Sequence[int],
    workers: Optional[int] = None,
) -> list[TrainResult]:
    """Train one network per seed; results sorted by seed. Re-raises the first failure."""
    outcomes = run_training_jobs([(matrix_set, config, seed) for seed in seeds], workers)
    for outcome in outcomes:
        if isinstance(outcome, BaseException):
            raise outcome
    return sorted(outcomes, key=lambda result: result.seed)


# ============================================================================
# Method runners
# ============================================================================

def _neural_bound(results: Sequence[TrainResult], config: TrainConfig) -> BoundReport:
    losses = np.array([result.best_loss for result in results])
    best = results[int(np.argmin(losses))]
    return BoundReport(
        value=best.best_loss,
        kind=BoundKind.EMPIRICAL,
        method="neural",
        wall_time=float(sum(result.wall_time for result in results)),
        meta={
            "seed": best.seed,
            "hidden_layers": config.hidden_layers,
            "width": config.width,
            "n_samples": config.n_samples,
            "seeds": len(results),
            "mean": float(losses.mean()),
            "std": float(losses.std(ddof=1)) if len(losses) > 1 else 0.0,
        },
    )


def _seed_summary(result: TrainResult) -> dict[str, Any]:
    """Per-seed record; ``trace`` holds [wall_time, loss] pairs, ``trace_points`` the full points."""
    return {
        "seed": result.seed,
        "best_loss": result.best_loss,
        "trace": [[point.wall_time, point.loss] for point in result.trace],
        "trace_points": [point.model_dump() for point in result.trace],
        "epochs_run": result.epochs_run,
        "wall_time": result.wall_time,
        "events": result.events,
    }


def load_network(path: Union[str, Path]) -> NetworkParams:
    try:
        return NetworkParams.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"Network file not found: {path}") from None
    except ValidationError as exc:
        raise ConfigError(f"Invalid network file {path}:\n{exc}") from exc


def load_samples(path: Union[str, Path]) -> SampleSet:
    try:
        return SampleSet.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"Sample file not found: {path}") from None
    except ValidationError as exc:
        raise ConfigError(f"Invalid sample file {path}:\n{exc}") from exc


def certify_network(
    matrix_set: MatrixSet,
    params: Optional[NetworkParams] = None,
    samples: Optional[SampleSet] = None,
    train_config: Optional[TrainConfig] = None,
    seed: int = 0,
    eps: float = 1e-9,
) -> dict[str, Any]:
    """
    Empirical loss and certified polytope bound for one network.

    Without ``params`` a network is trained first (2 hidden layers of 10
    neurons on 100 samples unless ``train_config`` says otherwise) and the
    polytope is built from its final sample set.

    Returns:
        Dict with ``empirical`` and ``certified`` BoundReports and the ``polytope``
    """
    if params is None:
        config = train_config or TrainConfig(**CERTIFY_TRAIN_DEFAULTS)
        result = neural.train(config, matrix_set, seed)
        params, samples = result.best_params, result.samples
    elif samples is None:
        raise ConfigError("Certifying a given network needs its sample set as well")
    else:
        result = None

    if samples.n != matrix_set.n or params.input_dim != matrix_set.n:
        raise ConfigError(
            f"Dimension mismatch: matrices are {matrix_set.n}-D, network input is "
            f"{params.input_dim}-D, samples are {samples.n}-D"
        )
    evaluation = neural.evaluate_loss(params, samples, matrix_set)
    empirical = BoundReport(
        value=evaluation.value,
        kind=BoundKind.EMPIRICAL,
        method="neural",
        wall_time=result.wall_time if result is not None else 0.0,
        meta={"sample_count": len(samples), "degenerate_count": evaluation.degenerate_count},
    )
    if result is None:
        result = TrainResult(seed=seed, best_loss=evaluation.value, best_params=params, samples=samples)
    norm = polytope.build_polytope_norm(result, samples, eps)
    certified = polytope.certified_bound(norm, matrix_set)
    return {"empirical": empirical, "certified": certified, "polytope": norm}


def _guarantees(query: TheoryQuery, uppers: dict[str, float], d: int) -> dict[str, Any]:
    intervals = {}
    if "quad" in uppers:
        intervals["ellipsoid"] = bounds.guarantee_interval(uppers["quad"], theory.tau_quad(query.n))
    if "sos" in uppers:
        root = theory.tau_sos(query.n, d) ** (1.0 / (2 * d))
        intervals[f"sos_degree_{2 * d}"] = bounds.guarantee_interval(uppers["sos"], root)
    if "polytope" in uppers and query.tau is not None:
        intervals["polytope"] = bounds.guarantee_interval(uppers["polytope"], query.tau)
    return intervals


def run_theory(params: dict[str, Any], default_n: int) -> dict[str, Any]:
    """
    Every calculator for one (n, τ, d, k) query.

    τ defaults to τ_SOS(n, d). ``upper`` maps ``quad``/``sos``/``polytope``
    to reported upper bounds and yields the matching guarantee intervals.
    """
    d = int(params.get("d", 4))
    n = int(params.get("n", default_n))
    tau = params.get("tau")
    if tau is None and theory.tau_sos(n, d) > 1:
        tau = float(theory.tau_sos(n, d))
    try:
        query = TheoryQuery(n=n, tau=tau, d=d, k=params.get("k"))
    except ValidationError as exc:
        raise DomainError(f"Invalid theory query:\n{exc}") from exc
    ceiling = int(params.get("ceiling", theory.DEFAULT_K_CEILING))

    values: dict[str, Any] = {
        "n": n,
        "d": d,
        "tau_quad": theory.tau_quad(n),
        "tau_sos": theory.tau_sos(n, d),
        "sos_variables": theory.sos_variable_count(n, d),
    }
    if query.k is not None:
        values["barvinok_D"] = theory.barvinok_D(n, query.k)
        if query.k > n:
            values["mcmullen_faces"] = theory.mcmullen_faces(n, query.k)
    if query.tau is not None:
        values["tau"] = query.tau
        values["structure"] = theory.network_structure_bound(n, query.tau, ceiling).model_dump()
    uppers = {key: float(value) for key, value in (params.get("upper") or {}).items()}
    values["guarantees"] = _guarantees(query, uppers, d)
    return values


def _reference_guarantees(n: int, references) -> dict[str, Any]:
    uppers = {}
    if references.rho_Q is not None:
        uppers["quad"] = references.rho_Q
    if references.rho_SOS4 is not None:
        uppers["sos"] = references.rho_SOS4
    return _guarantees(TheoryQuery(n=n, d=2), uppers, d=2)


def _dispatch(
    config: ExperimentConfig,
    matrix_set: MatrixSet,
    artifacts: dict[str, Any],
) -> tuple[list[BoundReport], dict[str, Any]]:
    params = config.params
    method = config.method
    extras: dict[str, Any] = {}

    if method == MethodType.LOWER:
        if "max_len" not in params:
            raise ConfigError("Method 'lower' needs params.max_len")
        report = bounds.lower_bound_products(
            matrix_set, int(params["max_len"]), cap=params.get("cap"), prune=bool(params.get("prune", False))
        )
        return [report], extras

    if method == MethodType.ELLIPSOID:
        report, norm = bounds.ellipsoidal_upper_bound(
            matrix_set,
            restarts=int(params.get("restarts", 10)),
            iters=int(params.get("iters", 3000)),
            seed=int(params.get("seed", config.seed_base)),
            step=float(params.get("step", 0.05)),
            final_step=float(params.get("final_step", 1e-6)),
        )
        extras["ellipsoidal_norm"] = norm.factor
        return [report], extras

    if method == MethodType.NEURAL:
        train_config = build_train_config(params)
        seeds = range(config.seed_base, config.seed_base + train_config.n_seeds)
        results = train_seeds(matrix_set, train_config, seeds, params.get("workers"))
        artifacts["results"] = results
        bound = _neural_bound(results, train_config)
        extras["seeds"] = [_seed_summary(result) for result in results]
        extras["aggregate"] = {
            "best": bound.value,
            "mean": bound.meta["mean"],
            "std": bound.meta["std"],
        }
        return [bound], extras

    if method == MethodType.CERTIFY:
        network = load_network(params["network"]) if params.get("network") else None
        samples = load_samples(params["samples"]) if params.get("samples") else None
        train_config = build_train_config(params.get("train") or {}, CERTIFY_TRAIN_DEFAULTS)
        outcome = certify_network(
            matrix_set,
            network,
            samples,
            train_config,
            seed=int(params.get("seed", config.seed_base)),
            eps=float(params.get("eps", 1e-9)),
        )
        artifacts["polytope"] = outcome["polytope"]
        extras["polytope"] = {"vertex_count": outcome["polytope"].vertex_count}
        return [outcome["empirical"], outcome["certified"]], extras

    extras["theory"] = run_theory(params, matrix_set.n)
    return [], extras


# ============================================================================
# Reports
# ============================================================================

def _default_output(config: ExperimentConfig, name: str) -> Path:
    return Path("results") / f"{name.replace(':', '-')}_{config.method.value}.json"


def build_report(config: ExperimentConfig, artifacts: Optional[dict[str, Any]] = None) -> dict[str, Any]:
    """
    Run the configured method and assemble the report dictionary.

    When ``artifacts`` is given it receives the unserialized objects behind
    the report (``results`` for neural runs, ``polytope`` for certify runs).
    """
    matrix_set = resolve_benchmark(config.benchmark)
    entry = get_entry(config.benchmark)
    logger.info(f"Running '{config.method.value}' on {entry.name} (n={matrix_set.n}, M={matrix_set.M})")
    computed, extras = _dispatch(config, matrix_set, artifacts if artifacts is not None else {})

    references = reference_constants(config.benchmark)
    reference = None
    if references is not None:
        reference = {"source": "reference", **references.model_dump()}
        reference["guarantees"] = _reference_guarantees(matrix_set.n, references)

    return {
        "config": config.model_dump(mode="json"),
        "benchmark": {
            "name": entry.name,
            "description": entry.description,
            "n": matrix_set.n,
            "M": matrix_set.M,
        },
        "computed": [report.model_dump(mode="json") for report in computed],
        "reference": reference,
        "extras": extras,
    }


def write_report(report: dict[str, Any], output: Union[str, Path]) -> Path:
    """Write the JSON report and its Markdown summary beside it."""
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    with open(output, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2)
    summary = get_template_manager().render(SUMMARY_TEMPLATE_ID, report)
    output.with_suffix(".md").write_text(summary, encoding="utf-8")
    logger.info(f"Report written to {output}")
    return output


def run_experiment(config: ExperimentConfig, output: Optional[Union[str, Path]] = None) -> Path:
    """
    Dispatch the configured method and write its report.

    The output path is, in order: ``output``, ``config.output``, or
    ``results/<benchmark>_<method>.json``.

    Raises:
        ConfigError: unknown benchmark or method parameters
    """
    report = build_report(config)
    target = output or config.output or _default_output(config, report["benchmark"]["name"])
    return write_report(report, target)


# ============================================================================
# CSV artifacts
# ============================================================================

def write_csv(frame: pd.DataFrame, path: Union[str, Path], comment: Optional[str] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        if comment:
            f.write(f"# {comment}\n")
        frame.to_csv(f, index=False, float_format=CSV_FLOAT_FORMAT)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def table1_repro(
    seeds: int,
    samples: int,
    output: Optional[Union[str, Path]] = None,
    seed_base: int = 0,
    epochs: Optional[int] = None,
    workers: Optional[int] = None,
) -> pd.DataFrame:
    """
    Best/mean/std of the neural estimate on sigma2 for every (k, m) in {1,2,3}×{5,10}.

    Failed seeds are logged and excluded; a cell with failures is marked in
    the ``status`` column, and a cell with no successful seed has NaN values.
    The std column is the sample standard deviation over seeds.

    Raises:
        DomainError: if seeds < 2
    """
    if seeds < 2:
        raise DomainError(f"table1 needs at least 2 seeds for a standard deviation (got {seeds})")
    matrix_set = resolve_benchmark("sigma2")
    published = {(row.k, row.m): row for row in get_entry("sigma2").table1}

    jobs, cells = [], []
    for k, m in TABLE1_ARCHITECTURES:
        overrides = {"hidden_layers": k, "width": m, "n_samples": samples, "n_seeds": seeds}
        if epochs is not None:
            overrides["epochs"] = epochs
        config = TrainConfig(**overrides)
        for seed in range(seed_base, seed_base + seeds):
            jobs.append((matrix_set, config, seed))
            cells.append((k, m, seed))
    outcomes = run_training_jobs(jobs, workers)

    records = sorted(zip(cells, outcomes), key=lambda item: item[0])
    rows = []
    for k, m in TABLE1_ARCHITECTURES:
        cell = [outcome for (ck, cm, _), outcome in records if (ck, cm) == (k, m)]
        losses = pd.Series([o.best_loss for o in cell if isinstance(o, TrainResult)], dtype=float)
        failed = len(cell) - len(losses)
        if failed == 0:
            status = "ok"
        elif losses.empty:
            status = "failed"
        else:
            status = f"partial ({failed}/{len(cell)} failed)"
        reference = published.get((k, m))
        rows.append(
            {
                "k": k,
                "m": m,
                "best": losses.min() if not losses.empty else math.nan,
                "mean": losses.mean() if not losses.empty else math.nan,
                "std": losses.std(ddof=1) if len(losses) > 1 else math.nan,
                "status": status,
                "ref_best": reference.best if reference else math.nan,
                "ref_mean": reference.mean if reference else math.nan,
                "ref_std": reference.std if reference else math.nan,
            }
        )
    frame = pd.DataFrame(rows, columns=TABLE1_COLUMNS)
    if output is not None:
        write_csv(frame, output)
    return frame


def _bands(traces: pd.DataFrame, buckets: int) -> pd.DataFrame:
    if traces.empty:
        return pd.DataFrame(columns=BAND_COLUMNS)
    edges = np.linspace(0.0, float(traces["wall_time"].max()), buckets + 1)[1:]
    rows = []
    for edge in edges:
        upto = traces[traces["wall_time"] <= edge]
        per_seed = upto.groupby("seed")["best_so_far"].last()
        if per_seed.empty:
            continue
        rows.append(
            {
                "wall_time": edge,
                "mean": per_seed.mean(),
                "min": per_seed.min(),
                "max": per_seed.max(),
                "seeds": len(per_seed),
            }
        )
    return pd.DataFrame(rows, columns=BAND_COLUMNS)


def bands_path(output: Union[str, Path]) -> Path:
    output = Path(output)
    return output.with_name(f"{output.stem}_bands.csv")


def convergence_trace(
    matrix_set: MatrixSet,
    config: TrainConfig,
    seeds: Sequence[int],
    output: Optional[Union[str, Path]] = None,
    buckets: int = 50,
    workers: Optional[int] = None,
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """
    Per-seed (time, loss) traces with a running best, plus min/mean/max bands.

    The running best restarts whenever the sample set grows, from the loss
    of the stored best network re-evaluated on the enlarged set, so its final
    value equals the seed's ``best_loss``. Bands aggregate, at each of
    ``buckets`` evenly spaced times, the latest running best of every seed
    that has reported by then. With ``output`` the traces
    go to that CSV and the bands to ``<stem>_bands.csv``; an empty seed list
    writes header-only files.
    """
    results = train_seeds(matrix_set, config, list(seeds), workers) if seeds else []
    rows = []
    for result in results:
        running, sample_count = math.inf, None
        for point in result.trace:
            # an enlarged sample set invalidates losses measured on the smaller one
            if point.sample_count != sample_count:
                running, sample_count = math.inf, point.sample_count
            running = min(running, point.loss)
            rows.append(
                {
                    "seed": result.seed,
                    "wall_time": point.wall_time,
                    "epoch": point.epoch,
                    "sample_count": point.sample_count,
                    "loss": point.loss,
                    "best_so_far": running,
                    "event": point.event or "",
                }
            )
    traces = pd.DataFrame(rows, columns=TRACE_COLUMNS)
    bands = _bands(traces, buckets)
    if output is not None:
        write_csv(traces, output)
        write_csv(bands, bands_path(output))
    return traces, bands


def fig1_table(d: int, n_max: int, output: Optional[Union[str, Path]] = None, n_min: int = 2) -> pd.DataFrame:
    """CPWL versus SOS variable counts at τ = τ_SOS(n, d) for n_min..n_max."""
    if n_max < n_min:
        raise DomainError(f"n_max must be >= {n_min} (got {n_max})")
    rows = theory.variables_comparison(range(n_min, n_max + 1), d)
    frame = pd.DataFrame([row.model_dump() for row in rows])[FIG1_COLUMNS]
    if output is not None:
        write_csv(frame, output, comment="sos_vars assumes the Gram-matrix count N(N+1)/2 with N = C(n+d-1, d)")
    return frame


__all__ = [
    "load_experiment_config",
    "parse_experiment_config",
    "build_train_config",
    "run_training_jobs",
    "train_seeds",
    "certify_network",
    "run_theory",
    "build_report",
    "write_report",
    "run_experiment",
    "write_csv",
    "table1_repro",
    "convergence_trace",
    "bands_path",
    "fig1_table",
    "load_network",
    "load_samples",
]
