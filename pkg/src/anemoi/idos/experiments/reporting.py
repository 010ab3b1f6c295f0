# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""CSV artifacts with a ``#``-prefixed metadata header."""

from __future__ import annotations

import io
import json
import logging
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import pandas as pd
from omegaconf import DictConfig
from omegaconf import OmegaConf

from anemoi.idos import __version__
from anemoi.idos.utils.jsonify import map_config_to_primitives

LOGGER = logging.getLogger(__name__)

CSV_FORMAT = "anemoi-idos-csv"
CSV_VERSION = 1


def artifact_metadata(digest: str, seed: int, **extra: Any) -> dict[str, Any]:
    """Header entries every artifact carries."""
    return {
        "format": f"{CSV_FORMAT} v{CSV_VERSION}",
        "version": __version__,
        "seed": seed,
        "digest": digest,
        **extra,
    }


def write_csv(table: pd.DataFrame, path: Path | str, metadata: Mapping[str, Any]) -> Path:
    """Write ``table`` below one ``# key: value`` line per metadata entry.

    Values that are not plain strings are stored as JSON.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buffer = io.StringIO()
    for key, value in metadata.items():
        text = value if isinstance(value, str) else json.dumps(map_config_to_primitives(value), sort_keys=True)
        buffer.write(f"# {key}: {text}\n")
    table.to_csv(buffer, index=False, float_format="%.10g")
    path.write_text(buffer.getvalue())
    LOGGER.info("Wrote %s (%d rows)", path, len(table))
    return path


def read_csv(path: Path | str) -> tuple[pd.DataFrame, dict[str, str]]:
    """Read a CSV artifact back into its table and raw metadata."""
    metadata = {}
    with Path(path).open() as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            metadata[key] = value
    return pd.read_csv(path, comment="#"), metadata


def write_effective_config(config: DictConfig, directory: Path | str) -> Path:
    """Store the resolved configuration next to the artifacts it produced."""
    path = Path(directory) / "effective-config.yaml"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(OmegaConf.to_yaml(config, resolve=True))
    return path
