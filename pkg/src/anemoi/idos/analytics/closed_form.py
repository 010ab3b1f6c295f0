# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Closed forms for an ambitious operator facing Poisson arrivals with deterministic inspection times.

Under these conditions an inspection started under action ``a_m`` is complete
exactly when fewer than ``m + 1`` arrivals fall within its inspection time, which
makes the deficiency level and the expected consolidated cost explicit.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import replace
from typing import NamedTuple

import numpy as np
from scipy.special import pdtr

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.errors import UndefinedLabelError
from anemoi.idos.operator.response import CORRECT_RESPONSE
from anemoi.idos.operator.response import AlertResponse
from anemoi.idos.operator.switching import AmbitiousSwitching
from anemoi.idos.process.kernels import posterior
from anemoi.idos.simulation.scenario import Scenario

LOGGER = logging.getLogger(__name__)

RESPONSES = list(AlertResponse)


def erlang_completion(m: int, beta: float, d: float | np.ndarray) -> float | np.ndarray:
    """Probability that fewer than ``m + 1`` Poisson(``beta``) arrivals fall within ``d``.

    Equals ``sum_{n<=m} exp(-beta d) (beta d)**n / n!``, the tail beyond ``d`` of the
    Erlang(``m + 1``, ``beta``) law, evaluated through the regularised incomplete gamma
    function.
    """
    if m < 0:
        msg = f"De-emphasis count must be non-negative, got {m}"
        raise ValueError(msg)
    if not beta > 0.0:
        msg = f"Arrival rate must be strictly positive, got {beta}"
        raise ValueError(msg)
    d = np.asarray(d, dtype=float)
    if np.any(d < 0.0):
        msg = "Inspection times must be non-negative."
        raise ValueError(msg)
    value = np.clip(pdtr(int(m), beta * d), 0.0, 1.0)
    return float(value) if value.ndim == 0 else value


class EcocBreakdown(NamedTuple):
    """Expected consolidated cost and its three components."""

    ecoc: float
    incomplete: float
    not_inspected: float
    reward: float


@dataclass(frozen=True, eq=False)
class ClosedFormContext:
    """Everything the closed forms need, laid out per (label, hidden state).

    Parameters
    ----------
    beta : float
        Arrival rate in alerts per second.
    label_keys : tuple[str, ...]
        Category label keys.
    state_keys : tuple[str, ...]
        Hidden (type, target) keys.
    targets : tuple[str, ...]
        Target of every hidden state.
    posterior : np.ndarray
        ``posterior[s, x] = Pr(x | s)``, NaN rows for undefined labels.
    inspection : np.ndarray
        Inspection time ``d(s, x)`` in seconds.
    success : np.ndarray
        Success probability ``p_SP(s, x)``.
    costs : np.ndarray
        Stage costs ``costs[response, s]``.
    correct : np.ndarray
        Row of ``costs`` holding the correct response of each hidden state.
    gamma : float
        Discount factor.

    """

    beta: float
    label_keys: tuple[str, ...]
    state_keys: tuple[str, ...]
    targets: tuple[str, ...]
    posterior: np.ndarray
    inspection: np.ndarray
    success: np.ndarray
    costs: np.ndarray
    correct: np.ndarray
    gamma: float

    def __post_init__(self) -> None:
        if not self.beta > 0.0:
            msg = f"Arrival rate must be strictly positive, got {self.beta}"
            raise ConfigurationError(msg, location="process.arrivals.rate")
        if np.any(self.inspection <= 0.0):
            msg = "Inspection times must be strictly positive."
            raise ConfigurationError(msg, location="operator.mean_inspection")

    @classmethod
    def from_scenario(cls, scenario: Scenario) -> ClosedFormContext:
        """Extract the context, refusing scenarios the closed forms do not describe.

        Raises
        ------
        ConfigurationError
            Unless arrivals are Poisson with a single rate, inspection times are
            deterministic and the operator is ambitious, undistracted at full
            efficiency and never stopped by the maximum allowable delay.

        """
        process = scenario.process
        beta = process.arrivals.rate
        if beta is None:
            msg = "Closed forms need Poisson arrivals with a single rate, set process.arrivals.mode=poisson."
            raise ConfigurationError(msg, location="process.arrivals.mode")
        if scenario.operator.aitn_noise != 0.0:
            msg = "Closed forms need deterministic inspection times, set operator.aitn_noise=0."
            raise ConfigurationError(msg, location="operator.aitn_noise")
        if not isinstance(scenario.operator.switching, AmbitiousSwitching):
            msg = "Closed forms only describe ambitious operators."
            raise ConfigurationError(msg, location="operator.switching")

        tables = scenario.tables
        inspection = np.maximum(tables.mean_inspection, scenario.operator.aitn_min)
        attention = scenario.operator.attention
        if any(attention.efficiency(0, threshold) != 1.0 for threshold in tables.thresholds):
            msg = "Closed forms need full efficiency before any distraction, use the trapezoid attention."
            raise ConfigurationError(msg, location="operator.attention")
        if np.any(tables.max_delay < inspection.max(axis=1)):
            msg = "Closed forms need a maximum allowable delay no shorter than any inspection time."
            raise ConfigurationError(msg, location="operator.max_delay")

        b = process.stationary
        rows = []
        for label in process.labels:
            try:
                rows.append(posterior(process.revelation, b, label))
            except UndefinedLabelError:
                rows.append(np.full(len(process.states), np.nan))
        costs = scenario.costs.values
        correct = np.array([RESPONSES.index(CORRECT_RESPONSE[x.type]) for x in process.states])
        return cls(
            beta=float(beta),
            label_keys=tuple(scenario.label_keys),
            state_keys=tuple(x.key for x in process.states),
            targets=tuple(x.target for x in process.states),
            posterior=np.vstack(rows),
            inspection=inspection,
            success=tables.success,
            costs=costs,
            correct=correct,
            gamma=scenario.am.gamma,
        )

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)):
            return int(label)
        try:
            return self.label_keys.index(label)
        except ValueError:
            msg = f"Unknown category label '{label}'"
            raise UndefinedLabelError(msg) from None

    def posterior_of(self, label: str | int) -> np.ndarray:
        s = self.index(label)
        row = self.posterior[s]
        if np.isnan(row).any():
            msg = f"Label '{self.label_keys[s]}' has zero probability, its closed forms are undefined."
            raise UndefinedLabelError(msg)
        return row

    def cost(self, response: AlertResponse, label: str | int) -> float:
        return float(self.costs[RESPONSES.index(response), self.index(label)])

    def rewards(self, label: str | int) -> np.ndarray:
        """Stage cost of the correct response to each hidden state at ``label``."""
        return self.costs[self.correct, self.index(label)]

    def with_inspection(self, inspection: np.ndarray) -> ClosedFormContext:
        return replace(self, inspection=np.asarray(inspection, dtype=float))

    def completion(self, label: str | int, m: int) -> np.ndarray:
        """Probability that an inspection of each hidden state at ``label`` completes under ``a_m``."""
        return erlang_completion(m, self.beta, self.inspection[self.index(label)])


def adl_closed_form(ctx: ClosedFormContext, label: str | int, m: int) -> float:
    """Attentional deficiency level ``p_UN(s, a_m)``."""
    post = ctx.posterior_of(label)
    completion = ctx.completion(label, m)
    value = float(post @ (1.0 - ctx.success[ctx.index(label)] * completion))
    return min(1.0, max(0.0, value))


def ecoc_breakdown(ctx: ClosedFormContext, label: str | int, m: int) -> EcocBreakdown:
    """Expected consolidated cost of an inspection of ``label`` under ``a_m``, by component.

    The components are the expected incomplete cost, the cost of the ``m``
    de-emphasized alerts and the expected reward of complete responses.
    """
    s = ctx.index(label)
    post = ctx.posterior_of(s)
    completion = ctx.completion(s, m)
    incomplete = adl_closed_form(ctx, s, m) * ctx.cost(AlertResponse.INCOMPLETE, s)
    not_inspected = m * ctx.cost(AlertResponse.NOT_INSPECTED, s)
    reward = float(np.sum(post * ctx.rewards(s) * ctx.success[s] * completion))
    return EcocBreakdown(incomplete + not_inspected + reward, incomplete, not_inspected, reward)


def ecoc_closed_form(ctx: ClosedFormContext, label: str | int, m: int) -> float:
    """Expected consolidated cost ``c(s, a_m)`` in dollars."""
    return ecoc_breakdown(ctx, label, m).ecoc


def adl_limit(ctx: ClosedFormContext, label: str | int) -> float:
    """Smallest deficiency level reachable by de-emphasis, the posterior-weighted capacity gap."""
    post = ctx.posterior_of(label)
    return float(post @ (1.0 - ctx.success[ctx.index(label)]))
