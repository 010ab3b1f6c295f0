# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Monte-Carlo estimates of risk, deficiency level and consolidated cost from episode logs."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np
import pandas as pd
from scipy.signal import lfilter

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.errors import InsufficientDataError
from anemoi.idos.operator.response import AlertResponse
from anemoi.idos.simulation.log import EpisodeLog

LOGGER = logging.getLogger(__name__)

INCOMPLETE = list(AlertResponse).index(AlertResponse.INCOMPLETE)
ESTIMATOR_MODES = ("first", "every")


class Estimate(NamedTuple):
    """Sample mean with its standard error."""

    value: float
    se: float
    samples: int
    episodes: int


def _label_index(log: EpisodeLog, label: str | int) -> int:
    if isinstance(label, (int, np.integer)):
        return int(label)
    try:
        return log.label_keys.index(label)
    except ValueError:
        msg = f"Unknown category label '{label}'"
        raise ConfigurationError(msg, location="triage.labels") from None


def _select(logs: Iterable[EpisodeLog], policy: str | None) -> list[EpisodeLog]:
    return [log for log in logs if policy is None or log.policy == policy]


def discounted_returns(costs: np.ndarray, gamma: float) -> np.ndarray:
    """``G[h] = sum_j gamma**(j - h) costs[j]`` over ``j >= h``."""
    costs = np.asarray(costs, dtype=float)
    if costs.size == 0:
        return costs
    return lfilter([1.0], [1.0, -gamma], costs[::-1])[::-1]


def min_remaining(gamma: float, truncation: float) -> int:
    """Inspections needed after a start for the neglected tail to weigh below ``truncation``."""
    if gamma <= 0.0:
        return 1
    return max(1, math.ceil(math.log(truncation) / math.log(gamma)))


def estimate_risk(
    logs: Iterable[EpisodeLog],
    gamma: float,
    label: str | int,
    policy: str | None = None,
    mode: str = "first",
    truncation: float = 1e-3,
) -> Estimate:
    """Discounted cumulative cost starting from an inspection of label ``label``.

    Returns are summed over the complete inspections of each episode. In ``first`` mode
    an episode contributes the return from its first inspection of the label, in
    ``every`` mode the mean over all of them. Starts too close to the end of the
    episode to bound the neglected tail by ``truncation`` are discarded.

    Parameters
    ----------
    logs : Iterable[EpisodeLog]
        Episodes run under a stationary policy.
    gamma : float
        Discount factor in ``[0, 1)``.
    label : str | int
        Category label key or index.
    policy : str, optional
        Only use the episodes run under this policy tag.
    mode : str, optional
        ``first`` or ``every``, by default ``first``
    truncation : float, optional
        Largest weight of the neglected tail, by default 1e-3

    Returns
    -------
    Estimate
        Mean over episodes and the standard error of that mean.

    Raises
    ------
    InsufficientDataError
        If no episode holds a usable start at ``label``.

    """
    if mode not in ESTIMATOR_MODES:
        msg = f"Unknown estimator mode '{mode}', expected one of {ESTIMATOR_MODES}"
        raise ConfigurationError(msg, location="sim.estimator")
    if not 0.0 <= gamma < 1.0:
        msg = f"Discount factor must lie in [0, 1), got {gamma}"
        raise ConfigurationError(msg, location="am.gamma")
    needed = min_remaining(gamma, truncation)

    per_episode = []
    samples = 0
    for log in _select(logs, policy):
        s = _label_index(log, label)
        inspections = log.inspections
        complete = inspections.complete
        costs = inspections.costs[complete]
        labels = inspections.labels[complete]
        returns = discounted_returns(costs, gamma)
        starts = np.flatnonzero(labels == s)
        if mode == "first":
            starts = starts[:1]
        starts = starts[costs.size - starts >= needed]
        if starts.size:
            per_episode.append(float(returns[starts].mean()))
            samples += int(starts.size)

    if not per_episode:
        msg = f"No episode of policy '{policy or 'any'}' has a usable start at label '{label}'"
        raise InsufficientDataError(msg)
    values = np.asarray(per_episode)
    se = float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else float("nan")
    return Estimate(float(values.mean()), se, samples, int(values.size))


def _inspection_mask(log: EpisodeLog, label: str | int, action: int | None) -> np.ndarray:
    inspections = log.inspections
    mask = inspections.complete & (inspections.labels == _label_index(log, label))
    if action is not None:
        mask &= inspections.actions == int(action)
    return mask


def estimate_adl(
    logs: Iterable[EpisodeLog],
    label: str | int,
    action: int | None = None,
    policy: str | None = None,
) -> Estimate:
    """Fraction of inspections of label ``label`` under ``action`` ending incomplete."""
    outcomes = []
    episodes = 0
    for log in _select(logs, policy):
        mask = _inspection_mask(log, label, action)
        if mask.any():
            outcomes.append(log.inspections.responses[mask] == INCOMPLETE)
            episodes += 1
    if not outcomes:
        msg = f"No complete inspection of label '{label}' under action {action}"
        raise InsufficientDataError(msg)
    flat = np.concatenate(outcomes)
    p = float(flat.mean())
    return Estimate(p, math.sqrt(p * (1.0 - p) / flat.size), int(flat.size), episodes)


def mean_coc(
    logs: Iterable[EpisodeLog],
    label: str | int,
    action: int | None = None,
    policy: str | None = None,
) -> Estimate:
    """Mean consolidated cost of the inspections of label ``label`` under ``action``."""
    values = []
    episodes = 0
    for log in _select(logs, policy):
        mask = _inspection_mask(log, label, action)
        if mask.any():
            values.append(log.inspections.costs[mask])
            episodes += 1
    if not values:
        msg = f"No complete inspection of label '{label}' under action {action}"
        raise InsufficientDataError(msg)
    flat = np.concatenate(values)
    se = float(flat.std(ddof=1) / math.sqrt(flat.size)) if flat.size > 1 else float("nan")
    return Estimate(float(flat.mean()), se, int(flat.size), episodes)


def risk_report(
    logs: Sequence[EpisodeLog],
    gamma: float,
    labels: Sequence[str],
    mode: str = "first",
    truncation: float = 1e-3,
) -> pd.DataFrame:
    """Per-label risk of every policy present in ``logs``.

    Labels without a usable start get a NaN risk and ``insufficient`` set.
    """
    rows = []
    for policy in dict.fromkeys(log.policy for log in logs):
        for label in labels:
            try:
                estimate = estimate_risk(logs, gamma, label, policy=policy, mode=mode, truncation=truncation)
            except InsufficientDataError as err:
                LOGGER.warning("%s", err)
                rows.append({"policy": policy, "label": label, "risk": np.nan, "se": np.nan, "insufficient": True})
                continue
            rows.append(
                {
                    "policy": policy,
                    "label": label,
                    "risk": estimate.value,
                    "se": estimate.se,
                    "insufficient": False,
                },
            )
    return pd.DataFrame(rows, columns=["policy", "label", "risk", "se", "insufficient"])
