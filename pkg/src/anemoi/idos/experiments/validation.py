# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Closed forms against Monte-Carlo estimates for an ambitious operator under Poisson arrivals."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd

from anemoi.idos.analytics.bounds import ecoc_bounds
from anemoi.idos.analytics.closed_form import ClosedFormContext
from anemoi.idos.analytics.closed_form import adl_closed_form
from anemoi.idos.analytics.closed_form import adl_limit
from anemoi.idos.analytics.closed_form import ecoc_closed_form
from anemoi.idos.errors import ConfigurationError
from anemoi.idos.errors import ConsistencyError
from anemoi.idos.errors import InsufficientDataError
from anemoi.idos.errors import ValidationFailure
from anemoi.idos.management.policy import fixed_policy
from anemoi.idos.simulation.engine import EvaluateMode
from anemoi.idos.simulation.engine import run_episode
from anemoi.idos.simulation.estimators import estimate_adl
from anemoi.idos.simulation.estimators import mean_coc
from anemoi.idos.simulation.log import EpisodeLog
from anemoi.idos.simulation.scenario import Scenario
from anemoi.idos.utils.parallel import map_ordered
from anemoi.idos.utils.seeding import episode_seed

LOGGER = logging.getLogger(__name__)

VALIDATE_PHASE = 2


@dataclass(frozen=True)
class Tolerances:
    """Pass bands of the Monte-Carlo comparisons."""

    adl: float = 0.01
    coc_se: float = 2.0
    epsilon0: float = 0.01


@dataclass(frozen=True, eq=False)
class ValidationReport:
    """Per (label, m) comparison and the structural verdicts.

    ``table`` columns: ``label``, ``m``, ``adl_closed``, ``adl_mc``, ``adl_ok``,
    ``ecoc_closed``, ``coc_mc``, ``coc_se``, ``coc_ok``, ``inspections``.
    """

    table: pd.DataFrame
    adl_decreasing: dict[str, bool]
    bounds_contained: dict[str, bool]

    @property
    def failures(self) -> list[dict]:
        cells = self.table[~(self.table["adl_ok"] & self.table["coc_ok"])]
        failures = cells.to_dict("records")
        failures.extend({"label": k, "check": "adl_decreasing"} for k, ok in self.adl_decreasing.items() if not ok)
        failures.extend({"label": k, "check": "bounds_contained"} for k, ok in self.bounds_contained.items() if not ok)
        return failures

    @property
    def passed(self) -> bool:
        return not self.failures

    def raise_for_failures(self) -> None:
        failures = self.failures
        if failures:
            msg = f"{len(failures)} validation checks failed, first: {failures[0]}"
            raise ValidationFailure(msg, failures)


def _simulate(scenario: Scenario, m: int, episode: int) -> EpisodeLog:
    policy = fixed_policy(scenario.label_keys, m)
    return run_episode(scenario, EvaluateMode(policy), episode_seed(scenario.seed, m, VALIDATE_PHASE, episode))


def _collect(
    scenario: Scenario,
    m: int,
    labels: Sequence[str],
    inspections: int,
    max_episodes: int,
    workers: int,
) -> list[EpisodeLog]:
    """Episodes under ``fixed_m`` until every label has ``inspections`` complete inspections."""
    logs = []
    counts = dict.fromkeys(labels, 0)
    batch = max(1, workers)
    while min(counts.values()) < inspections and len(logs) < max_episodes:
        start = len(logs)
        stop = min(start + batch, max_episodes)
        new = map_ordered(_simulate, [(scenario, m, e) for e in range(start, stop)], workers)
        logs.extend(new)
        for log in new:
            complete = log.inspections.labels[log.inspections.complete]
            for label in labels:
                counts[label] += int(np.sum(complete == log.label_keys.index(label)))
    if min(counts.values()) < inspections:
        LOGGER.warning("Stopped after %d episodes with %s inspections for m=%d", len(logs), counts, m)
    return logs


def validate(
    scenario: Scenario,
    m_grid: Sequence[int],
    inspections: int = 100_000,
    max_episodes: int = 1000,
    tolerances: Tolerances | None = None,
    num_workers: int = 1,
) -> ValidationReport:
    """Compare closed-form deficiency levels and costs with simulation, per label and ``m``.

    Parameters
    ----------
    scenario : Scenario
        Scenario with Poisson arrivals, deterministic inspection times and an
        ambitious operator.
    m_grid : Sequence[int]
        De-emphasis counts evaluated with ``fixed_m`` policies.
    inspections : int, optional
        Complete inspections wanted per label, by default 100_000
    max_episodes : int, optional
        Episode cap per ``m``, by default 1000
    tolerances : Tolerances, optional
        Pass bands.
    num_workers : int, optional
        Worker processes, by default 1

    Returns
    -------
    ValidationReport
        Comparison table and structural verdicts.

    """
    tolerances = tolerances or Tolerances()
    ctx = ClosedFormContext.from_scenario(scenario)
    labels = [key for key in scenario.label_keys if not np.isnan(ctx.posterior[ctx.index(key)]).any()]
    m_grid = sorted(int(m) for m in m_grid)
    if not m_grid or m_grid[0] < 0:
        msg = f"The de-emphasis grid must be non-empty and non-negative, got {m_grid}"
        raise ConfigurationError(msg, location="validate.m_grid")

    rows = []
    for m in m_grid:
        logs = _collect(scenario, m, labels, inspections, max_episodes, num_workers)
        for label in labels:
            adl_closed = adl_closed_form(ctx, label, m)
            ecoc_closed = ecoc_closed_form(ctx, label, m)
            try:
                adl = estimate_adl(logs, label, m)
                coc = mean_coc(logs, label, m)
            except InsufficientDataError as err:
                LOGGER.warning("%s", err)
                rows.append({"label": label, "m": m, "adl_closed": adl_closed, "ecoc_closed": ecoc_closed})
                continue
            coc_band = tolerances.coc_se * coc.se if np.isfinite(coc.se) else np.inf
            rows.append(
                {
                    "label": label,
                    "m": m,
                    "adl_closed": adl_closed,
                    "adl_mc": adl.value,
                    "adl_ok": abs(adl.value - adl_closed) <= tolerances.adl,
                    "ecoc_closed": ecoc_closed,
                    "coc_mc": coc.value,
                    "coc_se": coc.se,
                    "coc_ok": abs(coc.value - ecoc_closed) <= coc_band,
                    "inspections": adl.samples,
                },
            )
        LOGGER.info("Validated m=%d over %d episodes", m, len(logs))

    table = pd.DataFrame(rows)
    for column in ("adl_ok", "coc_ok"):
        table[column] = table[column].fillna(False).astype(bool) if column in table else False

    adl_decreasing = {}
    bounds_contained = {}
    for label in labels:
        closed = np.array([adl_closed_form(ctx, label, m) for m in m_grid])
        above = closed > adl_limit(ctx, label) + 1e-12
        adl_decreasing[label] = bool(np.all(np.diff(closed)[above[:-1]] < 0.0)) if closed.size > 1 else True
        try:
            ecoc_bounds(ctx, label, tolerances.epsilon0, m_max=max(m_grid))
            bounds_contained[label] = True
        except ConsistencyError as err:
            LOGGER.error("%s", err)
            bounds_contained[label] = False
    return ValidationReport(table, adl_decreasing, bounds_contained)
