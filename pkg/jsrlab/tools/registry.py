"""
Benchmark registry: named matrix sets and their published reference values.

Names are ``sigma2``, ``sigma8`` and ``family:<n>`` (n >= 2); ``family:8``
is the same set as ``sigma8`` and shares its references.
"""

import logging
from functools import lru_cache
from pathlib import Path
from typing import Callable, Optional, Union

import yaml

from jsrlab.errors import ConfigError
from jsrlab.schemas.experiment import BenchmarkEntry, ReferenceConstants
from jsrlab.schemas.matrix_set import MatrixSet
from jsrlab.tools.matset import benchmark_family, benchmark_sigma2, benchmark_sigma8

logger = logging.getLogger(__name__)

REFERENCES_FILE = Path(__file__).resolve().parent.parent / "data" / "references.yaml"
FAMILY_PREFIX = "family:"

_BUILDERS: dict[str, Callable[[], MatrixSet]] = {
    "sigma2": benchmark_sigma2,
    "sigma8": benchmark_sigma8,
}


@lru_cache(maxsize=None)
def _load_entries() -> dict[str, BenchmarkEntry]:
    with open(REFERENCES_FILE, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ConfigError(f"Invalid reference file structure in {REFERENCES_FILE}")
    return {name: BenchmarkEntry(name=name, **body) for name, body in data.items()}


def available_benchmarks() -> list[str]:
    """Registered names, with the parametric family shown as ``family:<n>``."""
    return sorted(_BUILDERS) + [f"{FAMILY_PREFIX}<n>"]


def _unknown(name: str) -> ConfigError:
    return ConfigError(
        f"Unknown benchmark '{name}'.\n"
        f"Available benchmarks: {', '.join(available_benchmarks())}\n"
        f"An inline matrix set can be given instead: {{\"n\": 2, \"matrices\": [[[...]]]}}"
    )


def _family_size(name: str) -> Optional[int]:
    if not name.startswith(FAMILY_PREFIX):
        return None
    raw = name[len(FAMILY_PREFIX):]
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"Benchmark '{name}': family size must be an integer (e.g. family:6)") from None
    if n < 2:
        raise ConfigError(f"Benchmark '{name}': family size must be >= 2")
    return n


def _canonical(name: str) -> str:
    size = _family_size(name)
    if size == 8:
        return "sigma8"
    return name


def resolve_benchmark(benchmark: Union[str, MatrixSet]) -> MatrixSet:
    """
    Turn a registry name or an inline MatrixSet into a MatrixSet.

    Raises:
        ConfigError: for unknown names, with the available options listed
    """
    if isinstance(benchmark, MatrixSet):
        return benchmark
    name = _canonical(benchmark.strip())
    if name in _BUILDERS:
        return _BUILDERS[name]()
    size = _family_size(name)
    if size is not None:
        return benchmark_family(size)
    raise _unknown(benchmark)


def get_entry(benchmark: Union[str, MatrixSet]) -> BenchmarkEntry:
    """Registry metadata; inline sets and family members without references get a bare entry."""
    if isinstance(benchmark, MatrixSet):
        return BenchmarkEntry(name=benchmark.name or "inline", description="inline matrix set")
    name = _canonical(benchmark.strip())
    entries = _load_entries()
    if name in entries:
        return entries[name]
    if name in _BUILDERS or _family_size(name) is not None:
        return BenchmarkEntry(name=name, description="parametric family member without published values")
    raise _unknown(benchmark)


def reference_constants(benchmark: Union[str, MatrixSet]) -> Optional[ReferenceConstants]:
    return get_entry(benchmark).references


__all__ = [
    "available_benchmarks",
    "resolve_benchmark",
    "get_entry",
    "reference_constants",
]
