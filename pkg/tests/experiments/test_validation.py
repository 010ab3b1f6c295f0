# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

import pandas as pd
import pytest

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.errors import ValidationFailure
from anemoi.idos.experiments.validation import Tolerances
from anemoi.idos.experiments.validation import ValidationReport
from anemoi.idos.experiments.validation import validate
from anemoi.idos.simulation.scenario import Scenario


@pytest.fixture(scope="module")
def tolerances() -> Tolerances:
    return Tolerances(adl=0.1, coc_se=4.0)


@pytest.mark.slow
def test_closed_forms_match_simulation(condition1: Scenario, tolerances: Tolerances) -> None:
    report = validate(condition1, [0, 1], inspections=600, max_episodes=60, tolerances=tolerances)
    table = report.table
    assert len(table) == 2 * len(condition1.labels)
    assert (table["inspections"] >= 600).all()
    assert table["adl_ok"].all()
    assert table["coc_ok"].all()
    assert all(report.adl_decreasing.values())
    assert all(report.bounds_contained.values())
    assert report.passed
    report.raise_for_failures()


def test_failures_are_collected() -> None:
    table = pd.DataFrame(
        [
            {"label": "cyber/low", "m": 0, "adl_ok": True, "coc_ok": True},
            {"label": "cyber/low", "m": 1, "adl_ok": False, "coc_ok": True},
        ],
    )
    report = ValidationReport(table, {"cyber/low": True}, {"cyber/low": False})
    assert not report.passed
    assert len(report.failures) == 2
    with pytest.raises(ValidationFailure) as err:
        report.raise_for_failures()
    assert err.value.failures[0]["m"] == 1
    assert err.value.failures[1] == {"label": "cyber/low", "check": "bounds_contained"}


def test_needs_a_non_empty_grid(condition1: Scenario) -> None:
    with pytest.raises(ConfigurationError) as err:
        validate(condition1, [])
    assert err.value.location == "validate.m_grid"


def test_refuses_scenarios_without_closed_forms(scenario: Scenario) -> None:
    with pytest.raises(ConfigurationError):
        validate(scenario, [0])
