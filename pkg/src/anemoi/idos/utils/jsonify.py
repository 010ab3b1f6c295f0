# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import dataclasses
import datetime
import enum
import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np
from omegaconf import DictConfig
from omegaconf import ListConfig
from omegaconf import OmegaConf


def map_config_to_primitives(config: Any) -> Any:
    """Ensure that the metadata information is JSON-serializable.

    Parameters
    ----------
    config : Any
        config object (or any nested metadata) to be mapped to primitives.

    Returns
    -------
    Any
        JSON serializable structure.

    Raises
    ------
    TypeError
        Cannot map object to primitives.

    """
    if config is None or isinstance(config, (bool, int, float, str)):
        return config

    if isinstance(config, enum.Enum):
        config = config.value
    elif isinstance(config, Path):
        config = str(config)
    elif isinstance(config, datetime.date):
        config = config.isoformat()
    elif isinstance(config, np.generic):
        config = config.item()
    elif isinstance(config, np.ndarray):
        config = map_config_to_primitives(config.tolist())
    elif isinstance(config, (list, tuple)):
        config = [map_config_to_primitives(v) for v in config]
    elif isinstance(config, dict):
        config = {str(map_config_to_primitives(k)): map_config_to_primitives(v) for k, v in config.items()}
    elif isinstance(config, (DictConfig, ListConfig)):
        config = map_config_to_primitives(OmegaConf.to_container(config, resolve=True))
    elif dataclasses.is_dataclass(config) and not isinstance(config, type):
        config = map_config_to_primitives(dataclasses.asdict(config))
    else:
        msg = f"Cannot serialize object of type {type(config)}"
        raise TypeError(msg)

    return config


def config_digest(config: Any) -> str:
    """SHA-256 digest of the canonical JSON form of a configuration.

    Keys are sorted, so two configs that resolve to the same values share a digest
    whatever the order they were composed in.
    """
    canonical = json.dumps(map_config_to_primitives(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
