# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd
from omegaconf import OmegaConf

from anemoi.idos.analytics.bounds import ecoc_bounds
from anemoi.idos.analytics.closed_form import ClosedFormContext
from anemoi.idos.analytics.closed_form import adl_closed_form
from anemoi.idos.analytics.closed_form import adl_limit
from anemoi.idos.analytics.closed_form import ecoc_breakdown
from anemoi.idos.analytics.ppoa import ppoa_curve
from anemoi.idos.commands import ScenarioCommand
from anemoi.idos.errors import UndefinedLabelError
from anemoi.idos.experiments.reporting import artifact_metadata
from anemoi.idos.experiments.reporting import write_csv
from anemoi.idos.experiments.reporting import write_effective_config
from anemoi.idos.simulation.scenario import load_scenario

if TYPE_CHECKING:
    import argparse

    from omegaconf import DictConfig

LOGGER = logging.getLogger(__name__)


def closed_form_tables(
    ctx: ClosedFormContext,
    m_max: int,
    epsilon0: float,
    products: np.ndarray,
    ppoa_m: int,
) -> dict[str, pd.DataFrame]:
    """Closed-form deficiency, cost, bounds, rewards and product curves of every defined label."""
    closed, bounds, rewards, curves = [], [], [], []
    for label in ctx.label_keys:
        try:
            p_lower = adl_limit(ctx, label)
        except UndefinedLabelError:
            LOGGER.warning("Label %s has zero probability and is skipped", label)
            continue
        for m in range(m_max + 1):
            row = {"label": label, "m": m, "p_un": adl_closed_form(ctx, label, m), "p_lower": p_lower}
            row.update(ecoc_breakdown(ctx, label, m)._asdict())
            closed.append(row)
        report = ecoc_bounds(ctx, label, epsilon0, m_max=m_max)
        bounds.append(report.table.assign(label=label, m_lower=report.m_lower, p_lower=report.p_lower))
        rewards.append(report.rewards.assign(label=label))
        curves.append(ppoa_curve(ctx, label, ppoa_m, products).assign(label=label, m=ppoa_m))
    return {
        "closed-form": pd.DataFrame(closed),
        "bounds": pd.concat(bounds, ignore_index=True),
        "rewards": pd.concat(rewards, ignore_index=True),
        "ppoa": pd.concat(curves, ignore_index=True),
    }


class Analyze(ScenarioCommand):
    """Closed-form deficiency levels, costs, bounds and product curves."""

    default_config = "condition1"

    def execute(self, config: DictConfig, args: argparse.Namespace) -> None:
        del args  # unused
        scenario = load_scenario(config)
        ctx = ClosedFormContext.from_scenario(scenario)
        analyze = OmegaConf.to_container(config.get("analyze") or OmegaConf.create({}), resolve=True)
        m_max = analyze.get("m_max")
        m_max = scenario.am.max_deemphasis if m_max is None else int(m_max)
        grid = analyze.get("products") or {"start": 0.1, "stop": 10.0, "step": 0.1}
        products = np.round(np.arange(grid["start"], grid["stop"] + grid["step"] / 2, grid["step"]), 10)
        ppoa_m = analyze.get("ppoa_m")

        tables = closed_form_tables(
            ctx,
            m_max,
            float(analyze.get("epsilon0", 0.01)),
            products,
            m_max if ppoa_m is None else int(ppoa_m),
        )
        output = self.output_dir(config)
        metadata = artifact_metadata(scenario.digest, scenario.seed, experiment="analyze", beta=ctx.beta)
        for name, table in tables.items():
            write_csv(table, output / f"analyze-{name}.csv", metadata)
        write_effective_config(config, output)
        LOGGER.info("Closed forms:\n%s", tables["closed-form"].to_string(index=False))


command = Analyze
