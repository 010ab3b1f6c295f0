# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import numpy as np
import pytest

from anemoi.idos.analytics.closed_form import ClosedFormContext
from anemoi.idos.simulation.scenario import Scenario

# rows ordered as AlertResponse: dismiss, escalate, incomplete, not inspected
COSTS = np.array([[-80.0, -80.0], [-500.0, -100.0], [300.0, 300.0], [300.0, 300.0]])


def make_context(
    inspection: list[list[float]],
    success: list[list[float]],
    posterior: list[list[float]] | None = None,
    beta: float = 0.1,
) -> ClosedFormContext:
    """Two labels over a feint and a real state on a single target."""
    return ClosedFormContext(
        beta=beta,
        label_keys=("physical/low", "physical/high"),
        state_keys=("feint/physical", "real/physical"),
        targets=("physical", "physical"),
        posterior=np.asarray(posterior or [[0.8, 0.2], [0.2, 0.8]], dtype=float),
        inspection=np.asarray(inspection, dtype=float),
        success=np.asarray(success, dtype=float),
        costs=COSTS,
        correct=np.array([0, 1]),
        gamma=0.95,
    )


@pytest.fixture
def context() -> ClosedFormContext:
    return make_context([[6.0, 15.0], [8.0, 20.0]], [[0.9, 0.9], [0.9, 0.9]])


@pytest.fixture
def certain_context() -> ClosedFormContext:
    """Every complete inspection succeeds and lasts ten seconds."""
    return make_context([[10.0, 10.0], [10.0, 10.0]], [[1.0, 1.0], [1.0, 1.0]])


@pytest.fixture
def condition1_context(condition1: Scenario) -> ClosedFormContext:
    return ClosedFormContext.from_scenario(condition1)
