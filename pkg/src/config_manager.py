"""
Configuration management for the weak measurement toolkit.
Resolves run defaults (zero tolerance, seed, trial count, workers, verbosity)
from the environment, project config and global config.
"""

import json
import os
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from dotenv import load_dotenv

from src.weaksim.config import (
    DEFAULT_SEED,
    DEFAULT_TRIALS,
    DEFAULT_WORKERS,
    DEFAULT_ZERO_TEST_K,
    DEFAULT_ZERO_TOL,
)

# Auto-load a local .env so WEAKSIM_* overrides are picked up
load_dotenv()

ENV_KEYS = {
    "zero_tol": "WEAKSIM_ZERO_TOL",
    "zero_test_k": "WEAKSIM_ZERO_TEST_K",
    "seed": "WEAKSIM_SEED",
    "trials": "WEAKSIM_TRIALS",
    "workers": "WEAKSIM_WORKERS",
    "verbose": "WEAKSIM_VERBOSE",
}


def _parse_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    return str(value).strip().lower() in ("1", "true", "yes", "on")


class ConfigManager:
    """Manages run defaults for the weaksim CLI and library callers."""

    def __init__(self, config_paths: Optional[list] = None):
        self.config_paths = config_paths or [
            Path("./weaksim_config.json"),                 # Project config
            Path.home() / ".weaksim" / "config.json",      # Global config
        ]

    def _lookup(self, key: str, cast: Callable[[Any], Any], default: Any) -> Any:
        """Resolve `key` with priority: env > project config > global config > default."""
        env_value = os.getenv(ENV_KEYS[key])
        if env_value not in (None, ""):
            try:
                return cast(env_value)
            except ValueError:
                print(f"[config] ignoring {ENV_KEYS[key]}={env_value!r}: not a valid {key}")

        for config_path in self.config_paths:
            if config_path.exists():
                try:
                    with open(config_path) as f:
                        config = json.load(f)
                    if key in config:
                        return cast(config[key])
                except (OSError, ValueError, TypeError):
                    continue

        return default

    def get_zero_tol(self) -> float:
        return self._lookup("zero_tol", float, DEFAULT_ZERO_TOL)

    def get_zero_test_k(self) -> float:
        return self._lookup("zero_test_k", float, DEFAULT_ZERO_TEST_K)

    def get_seed(self) -> int:
        return self._lookup("seed", int, DEFAULT_SEED)

    def get_trials(self) -> int:
        return self._lookup("trials", int, DEFAULT_TRIALS)

    def get_workers(self) -> int:
        return max(1, self._lookup("workers", int, DEFAULT_WORKERS))

    def is_verbose(self) -> bool:
        return self._lookup("verbose", _parse_bool, False)

    def save_config(self, config: Dict[str, Any], path: Optional[Path] = None) -> None:
        """Save configuration to specified path or default project config."""
        if path is None:
            path = self.config_paths[0]

        # Create directory if needed
        path.parent.mkdir(parents=True, exist_ok=True)

        # Load existing config if it exists
        existing_config = {}
        if path.exists():
            try:
                with open(path) as f:
                    existing_config = json.load(f)
            except (OSError, ValueError):
                pass

        # Merge configurations
        existing_config.update(config)

        with open(path, "w") as f:
            json.dump(existing_config, f, indent=2)

    def load_all_configs(self) -> Dict[str, Dict[str, Any]]:
        """Load all available configurations for debugging."""
        configs = {"environment": {env: os.getenv(env) for env in ENV_KEYS.values()}}

        for config_path in self.config_paths:
            if config_path.exists():
                try:
                    with open(config_path) as f:
                        configs[str(config_path)] = json.load(f)
                except (OSError, ValueError) as e:
                    configs[str(config_path)] = {"error": str(e)}

        return configs
