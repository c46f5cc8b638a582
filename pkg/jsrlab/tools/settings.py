"""
Runtime configuration read from the environment.

    JSRLAB_WORKERS        worker processes for seed/cell fan-out (default 1)
    JSRLAB_LOG_LEVEL      logging level for the CLI (default INFO)
    JSRLAB_ENUM_CAP       default cap on M**K for product enumeration (default 10**7)
    JSRLAB_TEMPLATES_DIR  override directory for report templates
"""

import logging
import os
from typing import Any, Dict

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10 ** 7


def _int_from_env(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not an integer; using {default}")
        return default
    if value < minimum:
        logger.warning(f"Ignoring {name}={value}: must be >= {minimum}; using {default}")
        return default
    return value


def get_runtime_config() -> Dict[str, Any]:
    """
    Collect runtime settings from environment variables.

    Returns:
        Dict with workers, log_level, enumeration_cap and templates_dir keys
    """
    return {
        "workers": _int_from_env("JSRLAB_WORKERS", 1, 1),
        "log_level": os.getenv("JSRLAB_LOG_LEVEL", "INFO").upper(),
        "enumeration_cap": _int_from_env("JSRLAB_ENUM_CAP", DEFAULT_ENUMERATION_CAP, 1),
        "templates_dir": os.getenv("JSRLAB_TEMPLATES_DIR"),
    }
