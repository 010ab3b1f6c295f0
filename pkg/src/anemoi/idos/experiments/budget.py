# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Attacker budget per work shift."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any

import numpy as np

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.process.types import AttackType
from anemoi.idos.simulation.scenario import ProcessModel

LOGGER = logging.getLogger(__name__)

SHIFT_SECONDS = 86400.0


@dataclass(frozen=True)
class BudgetModel:
    """Cost of crafting attacks and the budget available per shift.

    Parameters
    ----------
    feint_cost : float
        Dollars per feint attack.
    real_cost : float
        Dollars per real attack, at least ``feint_cost``.
    max_cost : float
        Dollars available per shift.
    shift_length : float
        Shift length in seconds.

    """

    feint_cost: float
    real_cost: float
    max_cost: float = 270.0
    shift_length: float = SHIFT_SECONDS

    def __post_init__(self) -> None:
        if not 0.0 < self.feint_cost <= self.real_cost:
            msg = f"Feints must be cheaper than real attacks, got {self.feint_cost} and {self.real_cost}"
            raise ConfigurationError(msg, location="sweep.budget")
        if not self.max_cost > 0.0 or not self.shift_length > 0.0:
            msg = "Budget and shift length must be strictly positive."
            raise ConfigurationError(msg, location="sweep.budget")

    @classmethod
    def from_config(cls, budget: Mapping[str, Any], shift_length: float = SHIFT_SECONDS) -> BudgetModel:
        real_cost = float(budget.get("real_cost", 0.04))
        feint_cost = budget.get("feint_cost")
        if feint_cost is None:
            feint_cost = real_cost * float(budget.get("feint_ratio", 0.1))
        return cls(float(feint_cost), real_cost, float(budget.get("max_cost", 270.0)), shift_length)

    def cost_per_attack(self, eta_fe: float) -> float:
        if not 0.0 <= eta_fe <= 1.0:
            msg = f"Feint fraction must lie in [0, 1], got {eta_fe}"
            raise ConfigurationError(msg, location="process.kernel.eta_fe")
        return eta_fe * self.feint_cost + (1.0 - eta_fe) * self.real_cost


def attack_cost_per_shift(budget: BudgetModel, rate: float, eta_fe: float) -> float:
    """Dollars spent per shift at ``rate`` attacks per second, a fraction ``eta_fe`` being feints."""
    if not rate > 0.0:
        msg = f"Attack rate must be strictly positive, got {rate}"
        raise ConfigurationError(msg, location="process.arrivals.rate")
    return budget.shift_length * rate * budget.cost_per_attack(eta_fe)


def solve_rate(budget: BudgetModel, eta_fe: float) -> float:
    """Attack rate spending exactly the budget."""
    denominator = budget.shift_length * budget.cost_per_attack(eta_fe)
    if denominator <= 0.0:
        msg = "Attacks cost nothing, the budget does not bound the rate."
        raise ConfigurationError(msg, location="sweep.budget")
    return budget.max_cost / denominator


def expected_attack_cost(budget: BudgetModel, process: ProcessModel) -> float:
    """Expected dollars per shift for any kernel and inter-arrival law.

    The long-run arrival rate is the inverse of the stationary mean inter-arrival
    time, the feint fraction is the stationary feint mass.
    """
    b = process.stationary
    mean = process.arrivals.stationary_mean(process.kernel, b)
    feints = np.array([state.type is AttackType.FEINT for state in process.states])
    eta_fe = float(np.clip(b.probabilities[feints].sum(), 0.0, 1.0))
    return attack_cost_per_shift(budget, 1.0 / mean, eta_fe)
