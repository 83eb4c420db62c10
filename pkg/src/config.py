# ============================================================================
# CHANGELOG (recent first, max 5 entries)
# 10/18/2026 - RunConfig echo/replay, MAJDYN_SEED fallback
# 10/16/2026 - Reworked from the server config module (paths, logging, JSON config)
# ============================================================================
"""
Configuration for majdyn.

Handles path resolution, logging setup, and configuration loading.
All config paths are resolved relative to PROJECT_ROOT so the CLI
behaves the same regardless of the working directory it's started from.
Output paths are resolved relative to the --out directory instead.
"""

import copy
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional

from . import __version__
from .errors import ConfigError

# Project root directory (for resolving relative paths)
PROJECT_ROOT = Path(__file__).parent.parent

CONFIG_PATH = PROJECT_ROOT / "config" / "majdyn.json"
LOG_DIR = PROJECT_ROOT / "logs"

SEED_ENV_VAR = "MAJDYN_SEED"

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

logger = logging.getLogger(__name__)


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[str] = None) -> Dict[str, Any]:
    """
    Load the default configuration, optionally overlaid with a user file.

    Args:
        path: Optional JSON file deep-merged over config/majdyn.json

    Returns:
        Configuration dict
    """
    try:
        with open(CONFIG_PATH) as f:
            config = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read default config {CONFIG_PATH}: {e}") from e

    if path:
        user_path = resolve_path(path)
        try:
            with open(user_path) as f:
                overlay = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {user_path}: {e}") from e
        config = _deep_merge(config, overlay)
        logger.debug(f"Merged config overlay from {user_path}")

    return config


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> None:
    """
    Configure root logging: stderr always, plus a file when requested.

    Args:
        level: Logging level name
        log_file: Optional log file path (relative paths land in logs/)
    """
    handlers: list = [logging.StreamHandler()]
    if log_file:
        log_path = Path(log_file)
        if not log_path.is_absolute():
            LOG_DIR.mkdir(exist_ok=True)
            log_path = LOG_DIR / log_path
        handlers.append(logging.FileHandler(log_path))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def resolve_path(path_str: str) -> Path:
    """
    Resolve a config path relative to PROJECT_ROOT or expand ~.

    Args:
        path_str: Path string from configuration

    Returns:
        Resolved absolute path
    """
    path = Path(path_str)
    if path_str.startswith("~"):
        return path.expanduser()
    if path.is_absolute():
        return path
    return PROJECT_ROOT / path


def resolve_seed(cli_seed: Optional[int], config: Optional[Dict[str, Any]] = None) -> int:
    """Seed precedence: CLI flag, then MAJDYN_SEED, then config default."""
    if cli_seed is not None:
        return int(cli_seed)

    env_seed = os.getenv(SEED_ENV_VAR)
    if env_seed:
        try:
            return int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}")

    defaults = (config or {}).get("defaults", {})
    return int(defaults.get("seed", 0))


def get_output_path(out_dir: str, name: str = "") -> Path:
    """
    Get a path within the output directory, creating the directory.

    Args:
        out_dir: The --out directory (relative to the cwd)
        name: Optional file name inside it
    """
    root = Path(out_dir).expanduser()
    root.mkdir(parents=True, exist_ok=True)
    if name:
        return root / name
    return root


@dataclass
class RunConfig:
    """
    Fully resolved invocation, echoed into every output for replay.

    Attributes:
        command: Subcommand (simulate, experiment, analyze)
        graph: Graph-family parameters
        dynamics: horizon, self_weight, weighted
        experiment: Experiment id, parameters and thresholds
        seed: Master seed
        out_dir: Output directory
        workers: Trial-level worker count
        settings: Resolved config sections (dynamics, generators, analysis, experiments)
        version: Artifact version string
    """

    command: str
    graph: Dict[str, Any] = field(default_factory=dict)
    dynamics: Dict[str, Any] = field(default_factory=dict)
    experiment: Dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out_dir: str = "runs"
    workers: int = 1
    settings: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        if "command" not in known:
            raise ConfigError("replay config is missing 'command'")
        return cls(**known)

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        """Load an echoed config (a report.json or outcome.json works too)."""
        try:
            with open(Path(path).expanduser()) as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read replay config {path}: {e}") from e
        # reports nest the echo under "config"
        if "config" in data and isinstance(data["config"], dict):
            data = data["config"]
        return cls.from_dict(data)
