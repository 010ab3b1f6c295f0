# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import pdtr
from scipy.stats import poisson

from anemoi.idos.analytics.closed_form import ClosedFormContext
from anemoi.idos.analytics.closed_form import adl_limit
from anemoi.idos.analytics.closed_form import ecoc_closed_form
from anemoi.idos.errors import ConsistencyError
from anemoi.idos.operator.response import AlertResponse

LOGGER = logging.getLogger(__name__)

TOLERANCE = 1e-9


def min_deemphasis(products: np.ndarray, epsilon0: float) -> int:
    """Smallest ``m`` with ``pdtr(m, q) >= 1 - epsilon0`` for every product ``q``."""
    target = 1.0 - epsilon0
    lowest = 0
    for q in np.atleast_1d(products):
        m = max(0, int(poisson.ppf(target, q))) if target > 0.0 else 0
        # ppf is computed in floating point, settle the edge on pdtr itself
        while pdtr(m, q) < target:
            m += 1
        while m > 0 and pdtr(m - 1, q) >= target:
            m -= 1
        lowest = max(lowest, m)
    return lowest


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Bounds on the expected consolidated cost once ``m`` reaches ``m_lower``.

    Attributes
    ----------
    label : str
        Category label key.
    epsilon0 : float
        Tolerance on the completion probability.
    p_lower : float
        Limit of the deficiency level.
    m_lower : int
        Smallest ``m`` bringing every completion probability within ``epsilon0`` of 1.
    reward_by_target : dict[str, float]
        Expected reward of a complete response at ``m_lower``, per target.
    lambda_min : dict[str, float]
        Reward with certain completion, per target.
    lambda_max : dict[str, float]
        ``(1 - epsilon0) * lambda_min``, per target.
    table : pd.DataFrame
        ``m``, ``c_min``, ``c_max``, ``ecoc``, ``risk_min``, ``risk_max`` for
        ``m_lower <= m <= m_max``.
    rewards : pd.DataFrame
        ``m``, ``target``, ``reward`` for ``0 <= m <= m_max``: the expected reward of a
        complete response per target, next to its ``lambda_min`` and ``lambda_max`` bounds.

    """

    label: str
    epsilon0: float
    p_lower: float
    m_lower: int
    reward_by_target: dict[str, float]
    lambda_min: dict[str, float]
    lambda_max: dict[str, float]
    table: pd.DataFrame
    rewards: pd.DataFrame

    @property
    def contained(self) -> bool:
        return bool(
            np.all(self.table["ecoc"] >= self.table["c_min"] - TOLERANCE)
            and np.all(self.table["ecoc"] <= self.table["c_max"] + TOLERANCE),
        )


def _by_target(ctx: ClosedFormContext, values: np.ndarray) -> dict[str, float]:
    out: dict[str, float] = {}
    for target, value in zip(ctx.targets, values):
        out[target] = out.get(target, 0.0) + float(value)
    return out


def c_min(ctx: ClosedFormContext, label: str | int, m: int) -> float:
    s = ctx.index(label)
    post = ctx.posterior_of(s)
    lam = float(np.sum(ctx.rewards(s) * post * ctx.success[s]))
    incomplete = adl_limit(ctx, s) * ctx.cost(AlertResponse.INCOMPLETE, s)
    return lam + incomplete + m * ctx.cost(AlertResponse.NOT_INSPECTED, s)


def c_max(ctx: ClosedFormContext, label: str | int, m: int, epsilon0: float) -> float:
    s = ctx.index(label)
    post = ctx.posterior_of(s)
    lam = (1.0 - epsilon0) * float(np.sum(ctx.rewards(s) * post * ctx.success[s]))
    p = adl_limit(ctx, s)
    incomplete = (p + epsilon0 * (1.0 - p)) * ctx.cost(AlertResponse.INCOMPLETE, s)
    return lam + incomplete + m * ctx.cost(AlertResponse.NOT_INSPECTED, s)


def ecoc_bounds(ctx: ClosedFormContext, label: str | int, epsilon0: float, m_max: int | None = None) -> BoundReport:
    """Cost bounds holding for every ``m >= m_lower`` and the risk bounds they imply.

    The risk bounds are those of the constant-action policy, the cost bounds
    divided by ``1 - gamma``.

    Parameters
    ----------
    ctx : ClosedFormContext
        Closed-form context.
    label : str | int
        Category label.
    epsilon0 : float
        Tolerance in ``(0, 1]``.
    m_max : int, optional
        Largest ``m`` tabulated, by default ``m_lower + 10``

    Raises
    ------
    ConsistencyError
        If the closed-form cost leaves its bounds, which signals a formula bug.

    """
    if not 0.0 < epsilon0 <= 1.0:
        msg = f"Completion tolerance must lie in (0, 1], got {epsilon0}"
        raise ValueError(msg)
    s = ctx.index(label)
    post = ctx.posterior_of(s)
    reachable = post > 0.0
    m_lower = min_deemphasis(ctx.beta * ctx.inspection[s][reachable], epsilon0)
    m_max = m_lower + 10 if m_max is None else max(int(m_max), m_lower)

    lam = ctx.rewards(s) * post * ctx.success[s]
    lambda_min = _by_target(ctx, lam)
    lambda_max = _by_target(ctx, (1.0 - epsilon0) * lam)
    rewards = [
        {"m": m, "target": target, "reward": value, "lambda_min": lambda_min[target], "lambda_max": lambda_max[target]}
        for m in range(m_max + 1)
        for target, value in _by_target(ctx, lam * ctx.completion(s, m)).items()
    ]
    rows = []
    for m in range(m_lower, m_max + 1):
        low = c_min(ctx, s, m)
        high = c_max(ctx, s, m, epsilon0)
        rows.append(
            {
                "m": m,
                "c_min": low,
                "c_max": high,
                "ecoc": ecoc_closed_form(ctx, s, m),
                "risk_min": low / (1.0 - ctx.gamma),
                "risk_max": high / (1.0 - ctx.gamma),
            },
        )
    report = BoundReport(
        label=ctx.label_keys[s],
        epsilon0=float(epsilon0),
        p_lower=adl_limit(ctx, s),
        m_lower=m_lower,
        reward_by_target=_by_target(ctx, lam * ctx.completion(s, m_lower)),
        lambda_min=lambda_min,
        lambda_max=lambda_max,
        table=pd.DataFrame(rows),
        rewards=pd.DataFrame(rewards),
    )
    if not report.contained:
        msg = f"Closed-form cost of label '{report.label}' leaves its bounds for m >= {m_lower}"
        raise ConsistencyError(msg)
    LOGGER.debug("Bounds for %s: m_lower=%d, p_lower=%.4f", report.label, m_lower, report.p_lower)
    return report
