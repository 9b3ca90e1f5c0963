"""Resolution of run settings: command-line flags > config file > defaults."""

import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, TextIO, Union

from foukit.errors import DataError

logger = logging.getLogger(__name__)

ENV_THREADS = "FOUKIT_THREADS"


def resolve_threads(flag: Optional[int] = None) -> int:
    """
    Worker thread count: the flag, else $FOUKIT_THREADS, else 1.

    Raises:
        DataError: If the environment value is not a positive integer
    """
    if flag is not None:
        if flag < 1:
            raise DataError(f"--threads must be positive, got {flag}")
        return int(flag)
    raw = os.environ.get(ENV_THREADS)
    if raw is None or raw.strip() == "":
        return 1
    try:
        threads = int(raw)
    except ValueError as err:
        raise DataError(f"{ENV_THREADS}={raw!r} is not an integer") from err
    if threads < 1:
        raise DataError(f"{ENV_THREADS} must be positive, got {threads}")
    return threads


def load_config_file(path: Optional[Union[str, Path]]) -> Dict[str, Any]:
    """
    Read a JSON object of settings; no path gives an empty mapping.

    Raises:
        DataError: If the file is missing, unreadable or not a JSON object
    """
    if path is None:
        return {}
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise DataError(f"cannot read config file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise DataError(f"config file {path} is not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise DataError(f"config file {path} must hold a JSON object")
    return data


def merge_settings(
    defaults: Mapping[str, Any],
    file_values: Mapping[str, Any],
    flags: Mapping[str, Any],
) -> Dict[str, Any]:
    """
    Layer the three sources; flags left at None do not override.

    Keys of the config file that no command uses are kept and reported.
    """
    resolved = dict(defaults)
    unknown = sorted(set(file_values) - set(defaults))
    if unknown:
        logger.warning("Config file keys not used by this command: %s", ", ".join(unknown))
    resolved.update(file_values)
    resolved.update({k: v for k, v in flags.items() if v is not None})
    return resolved


def echo_resolved(settings: Mapping[str, Any], stream: Optional[TextIO] = None) -> None:
    """Write the resolved settings to stderr as one JSON block."""
    stream = sys.stderr if stream is None else stream
    stream.write(json.dumps({"resolved_config": dict(settings)}, indent=2, sort_keys=True, default=str))
    stream.write("\n")
