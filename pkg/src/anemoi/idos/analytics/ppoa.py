# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Deficiency level and cost as functions of the product of arrival rate and inspection time."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np
import pandas as pd

from anemoi.idos.analytics.closed_form import ClosedFormContext
from anemoi.idos.analytics.closed_form import adl_closed_form
from anemoi.idos.analytics.closed_form import ecoc_closed_form
from anemoi.idos.errors import ConsistencyError

LOGGER = logging.getLogger(__name__)

TOLERANCE = 1e-12


def mean_product(ctx: ClosedFormContext, label: str | int) -> float:
    """Posterior-weighted ``beta * d`` at ``label``."""
    s = ctx.index(label)
    return float(ctx.beta * ctx.posterior_of(s) @ ctx.inspection[s])


def at_product(ctx: ClosedFormContext, label: str | int, product: float) -> ClosedFormContext:
    """Context whose inspection times at ``label`` are rescaled to reach the mean ``product``.

    The ratios between hidden states are kept, only the overall level moves.
    """
    if not product > 0.0:
        msg = f"Products must be strictly positive, got {product}"
        raise ValueError(msg)
    s = ctx.index(label)
    inspection = ctx.inspection.copy()
    inspection[s] *= product / mean_product(ctx, s)
    return ctx.with_inspection(inspection)


def ppoa_curve(ctx: ClosedFormContext, label: str | int, m: int, products: Sequence[float]) -> pd.DataFrame:
    """Tabulate ``p_UN`` and the expected consolidated cost along a grid of products.

    Raises
    ------
    ConsistencyError
        If ``p_UN`` does not increase strictly along an increasing grid, or the cost
        decreases. A constant ``p_UN`` is accepted when no inspection of the label
        can succeed.

    """
    products = np.asarray(products, dtype=float)
    if products.size == 0:
        msg = "The product grid is empty."
        raise ValueError(msg)
    if np.any(np.diff(products) <= 0.0):
        msg = "The product grid must be strictly increasing."
        raise ValueError(msg)

    s = ctx.index(label)
    rows = []
    for q in products:
        scaled = at_product(ctx, s, q)
        rows.append({"product": q, "p_un": adl_closed_form(scaled, s, m), "ecoc": ecoc_closed_form(scaled, s, m)})
    curve = pd.DataFrame(rows)

    p_un = curve["p_un"].to_numpy()
    ecoc = curve["ecoc"].to_numpy()
    attainable = bool(np.any(ctx.posterior_of(s) * ctx.success[s] > 0.0))
    # saturated points sit at the numerical ceiling and cannot keep increasing
    open_steps = p_un[1:] < 1.0 - TOLERANCE
    if attainable and np.any(np.diff(p_un)[open_steps] <= 0.0):
        msg = f"Deficiency level of label '{ctx.label_keys[s]}' is not strictly increasing in the product."
        raise ConsistencyError(msg)
    if np.any(np.diff(p_un) < -TOLERANCE) or np.any(np.diff(ecoc) < -TOLERANCE * max(1.0, np.abs(ecoc).max())):
        msg = f"Deficiency level or cost of label '{ctx.label_keys[s]}' decreases with the product."
        raise ConsistencyError(msg)
    return curve
