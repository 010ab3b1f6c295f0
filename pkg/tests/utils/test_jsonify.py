# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

import datetime
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest
from omegaconf import OmegaConf

from anemoi.idos.operator.response import AlertResponse
from anemoi.idos.utils.jsonify import config_digest
from anemoi.idos.utils.jsonify import map_config_to_primitives


@dataclass
class Entry:
    value: float
    path: Path


def test_map_config_to_primitives() -> None:
    config = {
        "response": AlertResponse.INCOMPLETE,
        "path": Path("/tmp/out"),
        "date": datetime.date(2024, 5, 1),
        "array": np.arange(3),
        "scalar": np.float32(0.5),
        "entry": Entry(1.5, Path("a")),
        1: ("x", None),
        "config": OmegaConf.create({"a": {"b": "${c}"}, "c": 2}),
    }
    assert map_config_to_primitives(config) == {
        "response": "UN",
        "path": "/tmp/out",
        "date": "2024-05-01",
        "array": [0, 1, 2],
        "scalar": 0.5,
        "entry": {"value": 1.5, "path": "a"},
        "1": ["x", None],
        "config": {"a": {"b": 2}, "c": 2},
    }


def test_unserialisable_objects() -> None:
    with pytest.raises(TypeError, match="Cannot serialize"):
        map_config_to_primitives({"x": object()})


def test_digest_ignores_key_order() -> None:
    first = OmegaConf.create({"am": {"gamma": 0.95, "kc": 10.0}, "sim": {"seed": 1}})
    second = OmegaConf.create({"sim": {"seed": 1}, "am": {"kc": 10.0, "gamma": 0.95}})
    assert config_digest(first) == config_digest(second)
    assert len(config_digest(first)) == 64
    assert config_digest(first) != config_digest({"sim": {"seed": 2}})
