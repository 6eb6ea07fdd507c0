import hashlib
import json
import os
from pathlib import Path
from typing import Any, Dict, Optional, Union

from omegaconf import DictConfig, OmegaConf

PACKAGE_CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"


def find_project_root(marker: str = "pyproject.toml", start: Optional[Path] = None) -> Path:
    """Nearest directory at or above `start` holding `marker`; the `.env` file is read from there."""
    current_path = (start or Path(__file__)).resolve()
    while current_path != current_path.parent:
        if (current_path / marker).exists():
            return current_path
        current_path = current_path.parent

    raise FileNotFoundError(f"No '{marker}' at or above '{(start or Path(__file__)).resolve()}'.")


# An installed package has no pyproject.toml above it; the working directory is
# then the place where a `.env` file is looked up.
try:
    PROJECT_ROOT = find_project_root()
except FileNotFoundError:
    PROJECT_ROOT = Path.cwd()


def _register_resolvers() -> None:
    if not OmegaConf.has_resolver("env"):
        OmegaConf.register_new_resolver("env", lambda name: os.environ.get(name))


def load_app_config(config_dir: Union[str, Path, None] = None) -> DictConfig:
    """
    Package defaults for geomconc: `runtime.yaml` under `runtime` (threads,
    chunking, Monte Carlo budgets, window tails) and `packing.yaml` under
    `packing` (known c_S values and the greedy search budget).

    `${env:GEOMCONC_THREADS}` resolves from the environment at access time.
    `config_dir` replaces the shipped `core/config` directory, e.g. in tests.
    """
    _register_resolvers()

    config_path = Path(config_dir) if config_dir is not None else PACKAGE_CONFIG_DIR
    if not config_path.is_dir():
        raise FileNotFoundError(f"Configuration directory not found at '{config_path.resolve()}'")

    merged_config = OmegaConf.create()
    for p in sorted(config_path.glob("*.yaml")):
        try:
            merged_config[p.stem] = OmegaConf.load(p)
        except Exception as e:
            raise RuntimeError(f"Failed to load or parse configuration file '{p.name}': {e}") from e

    return merged_config


def load_experiment_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Reads an experiment file (JSON or YAML, both parse with OmegaConf) and
    returns it as a plain, fully resolved container.
    """
    _register_resolvers()
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Experiment config not found at '{path.resolve()}'")
    try:
        conf = OmegaConf.load(path)
    except Exception as e:
        raise ValueError(f"Failed to parse experiment config '{path.name}': {e}") from e
    container = OmegaConf.to_container(conf, resolve=True)
    if not isinstance(container, dict):
        raise ValueError(f"Experiment config '{path.name}' must contain a mapping at the top level.")
    return container


def canonical_json(payload: Dict[str, Any]) -> str:
    """Key-sorted compact JSON, the form that is hashed and echoed into result files."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(payload: Dict[str, Any]) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


def runtime_threads(app_config: DictConfig, override: Optional[int] = None) -> int:
    """Thread count: explicit override, then GEOMCONC_THREADS via the runtime config, then 1."""
    if override is not None:
        return int(override)
    value = app_config.runtime.get("threads") if "runtime" in app_config else None
    if value in (None, ""):
        return 1
    try:
        return max(1, int(value))
    except (TypeError, ValueError):
        raise ValueError(f"GEOMCONC_THREADS must be a positive integer, got '{value}'.")
