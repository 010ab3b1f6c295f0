# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from typing import Callable

import numpy as np
import pytest
from omegaconf import DictConfig
from omegaconf import OmegaConf

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.operator.switching import AmbitiousSwitching
from anemoi.idos.operator.switching import TabularSwitching
from anemoi.idos.simulation.scenario import Scenario
from anemoi.idos.simulation.scenario import load_scenario

Compose = Callable[..., DictConfig]

LABEL_KEYS = {"physical/low", "physical/high", "cyber/low", "cyber/high"}


def test_benchmark_scenario(benchmark_config: DictConfig) -> None:
    scenario = load_scenario(benchmark_config)
    assert set(scenario.label_keys) == LABEL_KEYS
    assert len(scenario.process.states) == 4
    assert scenario.process.label_marginal.sum() == pytest.approx(1.0)
    assert isinstance(scenario.operator.switching, TabularSwitching)
    assert scenario.tables.mean_inspection.shape == (4, 4)
    assert scenario.horizon == 12000
    assert scenario.shift_length == 86400.0


def test_condition1_scenario(condition1: Scenario) -> None:
    assert condition1.process.arrivals.rate == pytest.approx(0.1)
    assert isinstance(condition1.operator.switching, AmbitiousSwitching)
    assert condition1.operator.aitn_noise == 0.0
    assert np.all(condition1.tables.max_delay == 1.0e9)
    assert condition1.seed == 7


def test_digest_follows_the_values(config: DictConfig, make_config: Compose) -> None:
    first = load_scenario(config)
    again = load_scenario(make_config("debug"))
    changed = load_scenario(make_config("debug", ["process.kernel.eta_fe=0.3"]))
    assert first.digest == again.digest
    assert first.digest != changed.digest


def test_missing_sections() -> None:
    with pytest.raises(ConfigurationError, match="triage") as err:
        load_scenario(OmegaConf.create({"process": {}}))
    assert err.value.location == "config"


@pytest.mark.parametrize(
    ("overrides", "location"),
    [
        (["am.gamma=1.0"], "am.gamma"),
        (["am.count_mode=stage"], "am.count_mode"),
        (["process.kernel.mode=markov"], "process.kernel.mode"),
        (["process=poisson", "process.arrivals.shape=2.0"], "process.arrivals.shape"),
        (["process.initial.type=decoy"], "process.initial.type"),
        (["operator.attention.slope=-1.0"], "operator.attention.slope"),
        (["sim.horizon=0"], "sim.horizon"),
        (["costs.dismiss=10.0"], "costs.dismiss"),
    ],
)
def test_invalid_entries_are_located(make_config: Compose, overrides: list[str], location: str) -> None:
    with pytest.raises(ConfigurationError) as err:
        load_scenario(make_config("debug", overrides))
    assert err.value.location == location


def test_seed_from_environment(make_config: Compose, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv("ANEMOI_BASE_SEED", "99")
    scenario = load_scenario(make_config("debug", ["sim.seed=null"]))
    assert scenario.seed == 99
