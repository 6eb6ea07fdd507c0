import json
import logging
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Union

import pandas as pd

from .config_parser import canonical_json, config_hash

logger = logging.getLogger(__name__)

ECHO_PREFIX = "# "


def artifact_version() -> str:
    try:
        return metadata.version("geomconc")
    except metadata.PackageNotFoundError:
        return "0.1.0"


def echo_block(config: Dict[str, Any]) -> str:
    master_seed = config.get("master_seed")
    lines = [
        f"geomconc {artifact_version()}",
        f"config_hash: {config_hash(config)}",
        f"master_seed: {master_seed}",
        f"config: {canonical_json(config)}",
    ]
    return "".join(f"{ECHO_PREFIX}{line}\n" for line in lines)


def write_report(frame: pd.DataFrame, path: Union[str, Path], config: Dict[str, Any]) -> Path:
    """Writes `frame` as CSV preceded by the config echo block."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(echo_block(config))
        frame.to_csv(handle, index=False)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def read_echo(path: Union[str, Path]) -> Dict[str, Any]:
    """Recovers the echoed config of a result file."""
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith(ECHO_PREFIX):
                break
            if line.startswith(f"{ECHO_PREFIX}config: "):
                return json.loads(line[len(f"{ECHO_PREFIX}config: "):])
    raise ValueError(f"No config echo found in '{path}'.")


def read_report(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")
