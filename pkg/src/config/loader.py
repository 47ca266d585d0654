import json
from pathlib import Path
from typing import Any, Dict, Optional, Sequence
from loguru import logger
from pydantic import ValidationError

from src.config.schemas import Config
from src.errors import ConfigError


def _parse_value(raw: str) -> Any:
    """JSON value when it parses, the raw string otherwise."""
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_override(data: Dict[str, Any], assignment: str) -> Dict[str, Any]:
    """
    Apply one `dotted.key=value` assignment to a nested config dict in place.

    Args:
        data: Config dict (as read from JSON)
        assignment: e.g. "params.pd_iterations=10"

    Returns:
        The same dict, for chaining
    """
    key, sep, raw = assignment.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"override must look like key=value, got '{assignment}'")

    parts = key.strip().split(".")
    node = data
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override '{key}' descends into non-object '{part}'")
        node = child
    node[parts[-1]] = _parse_value(raw.strip())
    return data


def load_config(path: Optional[Path] = None, overrides: Sequence[str] = ()) -> Config:
    """
    Resolve the run configuration: defaults, then the JSON file, then overrides.

    Raises:
        ConfigError: unreadable file, malformed override, unknown key or invalid value
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        logger.debug(f"Loaded config file {path}")

    for assignment in overrides:
        apply_override(data, assignment)

    try:
        config = Config.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration: {e}") from e

    logger.debug(f"Resolved config: {config.model_dump(mode='json')}")
    return config


def dump_config(config: Config) -> str:
    return json.dumps(config.model_dump(mode="json"), indent=2)
