# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from fnmatch import fnmatchcase
from typing import Union

import numpy as np

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.operator.response import AlertResponse
from anemoi.idos.process.types import CategoryLabel

LOGGER = logging.getLogger(__name__)

CostSpec = Union[float, Mapping[str, float]]

CONFIG_KEYS = {
    AlertResponse.DISMISS: "dismiss",
    AlertResponse.ESCALATE: "escalate",
    AlertResponse.INCOMPLETE: "incomplete",
    AlertResponse.NOT_INSPECTED: "not_inspected",
}

REWARDS = (AlertResponse.DISMISS, AlertResponse.ESCALATE)

ROWS = {response: i for i, response in enumerate(AlertResponse)}


def _lookup(spec: CostSpec, label: CategoryLabel) -> float | None:
    if not isinstance(spec, Mapping):
        return float(spec)
    value = None
    for key, cost in spec.items():
        if key == label.source or fnmatchcase(label.key, key):
            value = float(cost)
    return value


@dataclass(frozen=True, eq=False)
class StageCostTable:
    """Signed cost of every (response, label) pair, rewards being negative.

    Parameters
    ----------
    labels : tuple[CategoryLabel, ...]
        Declared label set.
    values : np.ndarray
        ``values[response, label]`` in dollars, responses ordered as ``AlertResponse``.

    """

    labels: tuple[CategoryLabel, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        shape = (len(AlertResponse), len(self.labels))
        if self.values.shape != shape:
            msg = f"Cost table has shape {self.values.shape}, expected {shape}."
            raise ConfigurationError(msg, location="costs")
        for response in AlertResponse:
            row = self.values[self.row(response)]
            if response in REWARDS and np.any(row > 0.0):
                msg = f"Complete responses are rewards and must be non-positive, got {row.tolist()}"
                raise ConfigurationError(msg, location=f"costs.{CONFIG_KEYS[response]}")
            if response not in REWARDS and np.any(row < 0.0):
                msg = f"Incomplete and uninspected responses must cost a non-negative amount, got {row.tolist()}"
                raise ConfigurationError(msg, location=f"costs.{CONFIG_KEYS[response]}")

    @classmethod
    def from_config(cls, labels: Sequence[CategoryLabel], costs: Mapping[str, CostSpec]) -> StageCostTable:
        """Build the table from per-response entries.

        Each entry is a scalar or a mapping whose keys are either alert sources or
        label patterns; later keys take precedence.
        """
        missing = [key for key in CONFIG_KEYS.values() if key not in costs or costs[key] is None]
        if missing:
            msg = f"Missing stage costs for {missing}"
            raise ConfigurationError(msg, location="costs")
        values = np.empty((len(AlertResponse), len(labels)))
        for i, response in enumerate(AlertResponse):
            key = CONFIG_KEYS[response]
            for j, label in enumerate(labels):
                value = _lookup(costs[key], label)
                if value is None:
                    msg = f"No stage cost for label '{label.key}'"
                    raise ConfigurationError(msg, location=f"costs.{key}")
                values[i, j] = value
        return cls(tuple(labels), values)

    @staticmethod
    def row(response: AlertResponse) -> int:
        return ROWS[AlertResponse(response)]

    def index(self, label: CategoryLabel | str | int) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        key = label.key if isinstance(label, CategoryLabel) else label
        for j, candidate in enumerate(self.labels):
            if candidate.key == key:
                return j
        msg = f"No stage cost entry for label '{key}'"
        raise ConfigurationError(msg, location="costs")

    def cost(self, response: AlertResponse, label: CategoryLabel | str | int) -> float:
        return float(self.values[self.row(response), self.index(label)])

    def with_incomplete_cost(self, value: float) -> StageCostTable:
        """Copy with the incomplete and uninspected costs set to ``value``."""
        values = self.values.copy()
        values[self.row(AlertResponse.INCOMPLETE)] = value
        values[self.row(AlertResponse.NOT_INSPECTED)] = value
        return StageCostTable(self.labels, values)


def stage_cost(table: StageCostTable, response: AlertResponse, label: CategoryLabel | str | int) -> float:
    """Signed cost of giving ``response`` to an alert of label ``label``."""
    return table.cost(response, label)


def accumulate_coc(
    running: float,
    response: AlertResponse,
    label: CategoryLabel | str | int,
    table: StageCostTable,
) -> float:
    """Add one alert's stage cost to the consolidated cost of the inspection window."""
    return running + table.cost(response, label)
