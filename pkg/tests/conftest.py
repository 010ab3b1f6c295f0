# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.


from __future__ import annotations

from pathlib import Path
from typing import Callable

import pytest
from _pytest.fixtures import SubRequest
from hydra import compose
from hydra import initialize
from omegaconf import DictConfig

from anemoi.idos.simulation.scenario import Scenario
from anemoi.idos.simulation.scenario import load_scenario

CONFIG_PATH = "../src/anemoi/idos/config"


def compose_config(config_name: str, overrides: list[str] | None = None) -> DictConfig:
    with initialize(version_base=None, config_path=CONFIG_PATH):
        # config is relative to a module
        return compose(config_name=config_name, overrides=overrides or [])


@pytest.fixture
def config(request: SubRequest) -> DictConfig:
    overrides = getattr(request, "param", [])
    return compose_config("debug", overrides)


@pytest.fixture
def benchmark_config() -> DictConfig:
    return compose_config("benchmark")


@pytest.fixture
def scenario(config: DictConfig) -> Scenario:
    return load_scenario(config)


@pytest.fixture
def condition1_config(tmp_path: Path) -> DictConfig:
    return compose_config(
        "condition1",
        ["sim.seed=7", "sim.shift_length=2000", f"hardware.paths.output={tmp_path}"],
    )


@pytest.fixture
def condition1(condition1_config: DictConfig) -> Scenario:
    return load_scenario(condition1_config)


@pytest.fixture
def make_config() -> Callable[..., DictConfig]:
    return compose_config
