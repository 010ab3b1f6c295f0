# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

import numpy as np
import pytest

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.management.policy import AmAction
from anemoi.idos.management.policy import Policy
from anemoi.idos.management.policy import default_policy
from anemoi.idos.management.policy import fixed_policy
from anemoi.idos.management.policy import greedy_policy
from anemoi.idos.management.policy import regret_report
from anemoi.idos.management.policy import select_action
from anemoi.idos.management.qtable import QTable

LABELS = ["physical/low", "physical/high", "cyber/low", "cyber/high"]


@pytest.fixture
def table() -> QTable:
    table = QTable(LABELS, 3)
    table.values[:] = [
        [10.0, 8.0, 8.0, 9.0],
        [5.0, 4.0, 3.0, 1.0],
        [0.0, 0.0, 0.0, 0.0],
        [2.0, 1.0, 3.0, 4.0],
    ]
    return table


def test_uniform_exploration_frequencies(table: QTable) -> None:
    rng = np.random.default_rng(0)
    draws = np.array([select_action(table, 0, 1.0, rng).m for _ in range(100_000)])
    assert np.allclose(np.bincount(draws, minlength=4) / draws.size, 0.25, atol=0.01)


def test_greedy_ties_go_to_smallest_deemphasis(table: QTable) -> None:
    assert select_action(table, 0, 0.0) == AmAction(1)
    assert select_action(table, 2, 0.0) == AmAction(0)


def test_greedy_policy(table: QTable) -> None:
    policy = greedy_policy(table)
    assert policy.name == "optimal"
    assert policy.actions == (1, 3, 0, 1)
    assert policy("physical/high") == AmAction(3)
    assert policy(3) == AmAction(1)
    assert policy.as_dict()["cyber/high"] == 1


def test_default_and_fixed_policies() -> None:
    assert default_policy(LABELS).actions == (0, 0, 0, 0)
    fixed = fixed_policy(LABELS, 2)
    assert fixed.name == "fixed_2"
    assert set(fixed.actions) == {2}


def test_policy_needs_one_action_per_label() -> None:
    with pytest.raises(ConfigurationError):
        Policy("broken", tuple(LABELS), (0, 1))


def test_action_rejects_negative_count() -> None:
    with pytest.raises(ConfigurationError):
        AmAction(-1)
    assert str(AmAction(2)) == "a_2"


def test_invalid_epsilon(table: QTable) -> None:
    with pytest.raises(ConfigurationError):
        select_action(table, 0, 1.5)


def test_regret_report(table: QTable) -> None:
    report = regret_report(table)
    assert len(report) == 16
    row = report[(report["label"] == "physical/high") & (report["action"] == 0)].iloc[0]
    assert row["regret"] == pytest.approx(4.0)
    assert (report.groupby("label")["regret"].min() == 0.0).all()
