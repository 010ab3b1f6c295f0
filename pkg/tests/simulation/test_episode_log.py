# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

import json
from pathlib import Path

import numpy as np
import pytest

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.management.policy import fixed_policy
from anemoi.idos.simulation.engine import EvaluateMode
from anemoi.idos.simulation.engine import run_episode
from anemoi.idos.simulation.log import INSPECTION_FIELDS
from anemoi.idos.simulation.log import STAGE_FIELDS
from anemoi.idos.simulation.log import read_episode_log
from anemoi.idos.simulation.log import write_episode_log
from anemoi.idos.simulation.scenario import Scenario
from anemoi.idos.utils.seeding import episode_seed


@pytest.fixture
def episode_file(scenario: Scenario, tmp_path: Path) -> Path:
    log = run_episode(scenario, EvaluateMode(fixed_policy(scenario.label_keys, 1)), seed=episode_seed(1, 0, 1, 0))
    return write_episode_log(log, tmp_path / "logs" / "episode.jsonl")


def test_file_layout(episode_file: Path) -> None:
    lines = [json.loads(line) for line in episode_file.read_text().splitlines()]
    header = lines[0]
    assert header["format"] == "anemoi-idos-episode"
    assert header["version"] == 1
    assert header["policy"] == "fixed_1"
    assert header["seed"] == {"entropy": "1", "spawn_key": [0, 1, 0]}
    stage = next(line for line in lines if line.get("record") == "stage")
    inspection = next(line for line in lines if line.get("record") == "inspection")
    assert list(stage)[1:] == list(STAGE_FIELDS)
    assert list(inspection)[1:] == list(INSPECTION_FIELDS)
    assert inspection["q_value"] is None
    assert lines[-1]["truncated"] is True


def test_read_back(scenario: Scenario, episode_file: Path) -> None:
    log = read_episode_log(episode_file)
    assert log.label_keys == tuple(scenario.label_keys)
    assert log.digest == scenario.digest
    assert np.isnan(log.inspections.q_values).all()
    assert log.inspections.truncated.sum() == 1
    assert np.array_equal(log.stages.responses[log.inspections.stages], log.inspections.responses)


def test_rejects_other_files(tmp_path: Path) -> None:
    path = tmp_path / "other.jsonl"
    path.write_text(json.dumps({"format": "anemoi-idos-episode", "version": 0}) + "\n")
    with pytest.raises(ConfigurationError):
        read_episode_log(path)
