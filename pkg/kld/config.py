"""
Configuration loading for the kld commands

A configuration file is a JSON object holding one section per command:

    {"detect": {"alpha": 1.75, "smoother": "ma:5"}, "generate": {"seed": 6543}}

Values are resolved as: parameter defaults < configuration file < explicit
command line flags.
"""

import json
import logging
import os
from typing import Any, Dict, Iterable, Optional

from kld.errors import ConfigError

logger = logging.getLogger(__name__)


def read_configuration(filepath: str) -> Dict[str, Any]:
    """Read a JSON configuration file and return its top-level object.

    :param str filepath: Path to configuration file
    :rtype: dict
    """
    filepath = os.path.abspath(filepath)

    if not os.path.isfile(filepath):
        raise ConfigError(f"Configuration file {filepath} does not exist.")

    try:
        with open(filepath, encoding="utf-8") as strm:
            data = json.load(strm)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration file {filepath} is not valid JSON: {e}") from e

    if not isinstance(data, dict):
        raise ConfigError(f"Configuration file {filepath} must hold a JSON object")

    return data


def command_section(data: Dict[str, Any], command: str) -> Dict[str, Any]:
    """Extract the section for one command (empty when absent)."""
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"Section '{command}' of the configuration must be an object")
    return dict(section)


def resolve(
    command: str,
    defaults: Dict[str, Any],
    config_path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Merge defaults, the command's file section and explicit flags.

    Flags whose value is ``None`` were not given and do not override.
    Keys unknown to the command are rejected.
    """
    resolved = dict(defaults)
    known = set(defaults)

    if config_path:
        section = command_section(read_configuration(config_path), command)
        _check_keys(section, known, f"configuration section '{command}'")
        resolved.update(section)
        logger.debug(f"Loaded {len(section)} option(s) for '{command}' from {config_path}")

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        _check_keys([key], known, "command line")
        resolved[key] = value

    return resolved


def _check_keys(keys: Iterable[str], known, where: str) -> None:
    unknown = sorted(set(keys) - set(known))
    if unknown:
        raise ConfigError(f"Unknown option(s) in {where}: {', '.join(unknown)}")
