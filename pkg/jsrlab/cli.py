"""
Command-line entry point: ``jsrlab <subcommand>``.

Exit codes: 0 success, 1 unexpected failure, 2 configuration or input error,
3 numerical failure, 4 budget exhaustion.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from pydantic import ValidationError

from jsrlab import __version__
from jsrlab.errors import ConfigError, EXIT_CODES, JSRLabError
from jsrlab.schemas.experiment import ExperimentConfig, MethodType
from jsrlab.tools import harness, theory
from jsrlab.tools.registry import resolve_benchmark
from jsrlab.tools.settings import get_runtime_config

logger = logging.getLogger("jsrlab")


def _experiment(args: argparse.Namespace, method: MethodType, params: dict) -> ExperimentConfig:
    return harness.parse_experiment_config(
        {
            "benchmark": args.benchmark,
            "method": method.value,
            "params": {key: value for key, value in params.items() if value is not None},
            "seed_base": getattr(args, "seed_base", 0),
        }
    )


def _print_computed(report: dict) -> None:
    for bound in report["computed"]:
        print(f"{bound['method']:<10} {bound['kind']:<16} {bound['value']:.10g}")
    if report["reference"] and report["reference"].get("jsr") is not None:
        print(f"{'reference':<10} {'jsr':<16} {report['reference']['jsr']:.10g}")


def _report(config: ExperimentConfig, out: Optional[Path]) -> dict:
    report = harness.build_report(config)
    _print_computed(report)
    if out is not None:
        harness.write_report(report, out)
    return report


# ============================================================================
# Handlers
# ============================================================================

def cmd_run(args: argparse.Namespace) -> int:
    config = harness.load_experiment_config(args.config)
    path = harness.run_experiment(config, args.out)
    with open(path, "r", encoding="utf-8") as f:
        _print_computed(json.load(f))
    print(f"Report: {path}")
    return 0


def cmd_bounds_lower(args: argparse.Namespace) -> int:
    params = {"max_len": args.max_len, "cap": args.cap, "prune": args.prune}
    _report(_experiment(args, MethodType.LOWER, params), args.out)
    return 0


def cmd_bounds_ellipsoid(args: argparse.Namespace) -> int:
    params = {"restarts": args.restarts, "iters": args.iters, "seed": args.seed}
    _report(_experiment(args, MethodType.ELLIPSOID, params), args.out)
    return 0


def cmd_theory_tau_sos(args: argparse.Namespace) -> int:
    print(theory.tau_sos(args.n, args.d))
    return 0


def cmd_theory_structure(args: argparse.Namespace) -> int:
    bound = theory.network_structure_bound(args.n, args.tau, args.ceiling)
    print(bound.model_dump_json(indent=2))
    return 0


def cmd_theory_fig1(args: argparse.Namespace) -> int:
    frame = harness.fig1_table(args.d, args.n_max, args.out)
    if args.out is None:
        print(frame.to_csv(index=False, float_format=harness.CSV_FLOAT_FORMAT), end="")
    return 0


def _train_params(args: argparse.Namespace) -> dict:
    return {
        "hidden_layers": args.layers,
        "width": args.width,
        "n_samples": args.samples,
        "n_seeds": args.seeds,
        "epochs": args.epochs,
        "l1_coeff": args.l1,
        "incremental": True if args.incremental else None,
    }


def cmd_train(args: argparse.Namespace) -> int:
    config = _experiment(args, MethodType.NEURAL, _train_params(args))
    artifacts: dict = {}
    report = harness.build_report(config, artifacts)
    _print_computed(report)
    harness.write_report(report, args.out)

    best = min(artifacts["results"], key=lambda result: result.best_loss)
    if args.network_out:
        Path(args.network_out).write_text(best.best_params.model_dump_json(indent=2), encoding="utf-8")
        print(f"Network of seed {best.seed}: {args.network_out}")
    if args.samples_out:
        Path(args.samples_out).write_text(best.samples.model_dump_json(indent=2), encoding="utf-8")
        print(f"Samples of seed {best.seed}: {args.samples_out}")
    return 0


def cmd_certify(args: argparse.Namespace) -> int:
    if (args.network is None) != (args.samples is None):
        raise ConfigError("--network and --samples must be given together (or neither, to train first)")
    params = {
        "network": str(args.network) if args.network else None,
        "samples": str(args.samples) if args.samples else None,
        "seed": args.seed,
    }
    _report(_experiment(args, MethodType.CERTIFY, params), args.out)
    return 0


def cmd_table1(args: argparse.Namespace) -> int:
    frame = harness.table1_repro(
        args.seeds, args.samples, args.out, seed_base=args.seed_base, epochs=args.epochs
    )
    print(frame.to_string(index=False))
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    matrix_set = resolve_benchmark(args.benchmark)
    params = {key: value for key, value in _train_params(args).items() if value is not None}
    config = harness.build_train_config(params)
    seeds = range(args.seed_base, args.seed_base + args.seeds)
    traces, bands = harness.convergence_trace(matrix_set, config, seeds, args.out)
    print(f"{len(traces)} trace rows, {len(bands)} band rows")
    return 0


# ============================================================================
# Parser
# ============================================================================

def _add_train_flags(parser: argparse.ArgumentParser, seeds_default: int) -> None:
    parser.add_argument("--benchmark", required=True, help="sigma2, sigma8 or family:<n>")
    parser.add_argument("--layers", type=int, default=1, help="Hidden layers k")
    parser.add_argument("--width", type=int, default=10, help="Neurons per layer m")
    parser.add_argument("--samples", type=int, default=500, help="Sample points on the sphere")
    parser.add_argument("--seeds", type=int, default=seeds_default, help="Number of seeds")
    parser.add_argument("--epochs", type=int, help="Optimizer steps per seed")
    parser.add_argument("--l1", type=float, help="L1 penalty on all weights")
    parser.add_argument("--incremental", action="store_true", help="Grow the sample set in 20%% chunks")
    parser.add_argument("--seed-base", type=int, default=0, help="First seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jsrlab", description="Joint spectral radius estimation toolkit")
    parser.add_argument("--version", action="version", version=f"jsrlab {__version__}")
    parser.add_argument("--log-level", help="Logging level (default: JSRLAB_LOG_LEVEL or INFO)")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run an experiment from a JSON/YAML config")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", type=Path, help="Report path (overrides the config)")
    run.set_defaults(handler=cmd_run)

    bounds = commands.add_parser("bounds", help="Product lower bound or ellipsoidal upper bound")
    bound_commands = bounds.add_subparsers(dest="bound", required=True)
    lower = bound_commands.add_parser("lower", help="Lower bound from products up to a length")
    lower.add_argument("--benchmark", required=True)
    lower.add_argument("--max-len", type=int, required=True)
    lower.add_argument("--cap", type=int, help="Largest admissible M**K (default JSRLAB_ENUM_CAP)")
    lower.add_argument("--prune", action="store_true", help="Skip subtrees that cannot improve the bound")
    lower.add_argument("--out", type=Path)
    lower.set_defaults(handler=cmd_bounds_lower)
    ellipsoid = bound_commands.add_parser("ellipsoid", help="Certified bound from an optimized ellipsoidal norm")
    ellipsoid.add_argument("--benchmark", required=True)
    ellipsoid.add_argument("--restarts", type=int, default=10)
    ellipsoid.add_argument("--iters", type=int, default=3000)
    ellipsoid.add_argument("--seed", type=int, default=0)
    ellipsoid.add_argument("--out", type=Path)
    ellipsoid.set_defaults(handler=cmd_bounds_ellipsoid)

    theory_parser = commands.add_parser("theory", help="Closed-form guarantee calculators")
    theory_commands = theory_parser.add_subparsers(dest="calculator", required=True)
    tau_sos = theory_commands.add_parser("tau-sos", help="C(n+d-1, d)")
    tau_sos.add_argument("n", type=int)
    tau_sos.add_argument("d", type=int)
    tau_sos.set_defaults(handler=cmd_theory_tau_sos)
    structure = theory_commands.add_parser("structure", help="Network depth/width for precision tau")
    structure.add_argument("--n", type=int, required=True)
    structure.add_argument("--tau", type=float, required=True)
    structure.add_argument("--ceiling", type=int, default=theory.DEFAULT_K_CEILING)
    structure.set_defaults(handler=cmd_theory_structure)
    fig1 = theory_commands.add_parser("fig1", help="CPWL versus SOS variable counts")
    fig1.add_argument("--d", type=int, required=True)
    fig1.add_argument("--n-max", type=int, required=True)
    fig1.add_argument("--out", type=Path)
    fig1.set_defaults(handler=cmd_theory_fig1)

    train = commands.add_parser("train", help="Train neural Lyapunov functions over a seed range")
    _add_train_flags(train, seeds_default=20)
    train.add_argument("--out", type=Path, required=True, help="Report path (JSON)")
    train.add_argument("--network-out", type=Path, help="Best network parameters (JSON)")
    train.add_argument("--samples-out", type=Path, help="Sample set of the best seed (JSON)")
    train.set_defaults(handler=cmd_train)

    certify = commands.add_parser("certify", help="Certified polytope bound for a trained network")
    certify.add_argument("--benchmark", required=True)
    certify.add_argument("--network", type=Path, help="NetworkParams JSON (trains 2x10 on 100 samples if omitted)")
    certify.add_argument("--samples", type=Path, help="SampleSet JSON")
    certify.add_argument("--seed", type=int, default=0)
    certify.add_argument("--out", type=Path)
    certify.set_defaults(handler=cmd_certify)

    table1 = commands.add_parser("table1", help="Best/mean/std over seeds for every (k, m) on sigma2")
    table1.add_argument("--seeds", type=int, default=20)
    table1.add_argument("--samples", type=int, default=500)
    table1.add_argument("--epochs", type=int)
    table1.add_argument("--seed-base", type=int, default=0)
    table1.add_argument("--out", type=Path, required=True)
    table1.set_defaults(handler=cmd_table1)

    trace = commands.add_parser("trace", help="Loss-versus-time traces with min/mean/max bands")
    _add_train_flags(trace, seeds_default=10)
    trace.add_argument("--out", type=Path, required=True)
    trace.set_defaults(handler=cmd_trace)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = (args.log_level or get_runtime_config()["log_level"]).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except JSRLabError as exc:
        logger.error(str(exc))
        return exc.exit_code
    except ValidationError as exc:
        logger.error(f"Invalid input:\n{exc}")
        return EXIT_CODES["config"]
    except Exception:
        logger.exception("Unexpected failure")
        return EXIT_CODES["unexpected"]


if __name__ == "__main__":
    sys.exit(main())
