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

from omegaconf import OmegaConf

from anemoi.idos.commands import ScenarioCommand
from anemoi.idos.experiments.reporting import artifact_metadata
from anemoi.idos.experiments.reporting import write_csv
from anemoi.idos.experiments.reporting import write_effective_config
from anemoi.idos.experiments.validation import Tolerances
from anemoi.idos.experiments.validation import validate
from anemoi.idos.simulation.scenario import load_scenario

if TYPE_CHECKING:
    import argparse

    from omegaconf import DictConfig

LOGGER = logging.getLogger(__name__)


class Validate(ScenarioCommand):
    """Check the closed forms against simulation; exits with status 2 on any breach."""

    default_config = "condition1"
    episodes_keys = ("validate.max_episodes",)

    def execute(self, config: DictConfig, args: argparse.Namespace) -> None:
        del args  # unused
        scenario = load_scenario(config)
        section = OmegaConf.to_container(config.get("validate") or OmegaConf.create({}), resolve=True)
        m_grid = section.get("m_grid") or list(range(scenario.am.max_deemphasis + 1))
        tolerances = Tolerances(**(section.get("tolerance") or {}))

        report = validate(
            scenario,
            m_grid,
            inspections=int(section.get("inspections", 100_000)),
            max_episodes=int(section.get("max_episodes", 1000)),
            tolerances=tolerances,
            num_workers=self.num_workers(config),
        )
        output = self.output_dir(config)
        metadata = artifact_metadata(
            scenario.digest,
            scenario.seed,
            experiment="validate",
            passed=report.passed,
            adl_decreasing=report.adl_decreasing,
            bounds_contained=report.bounds_contained,
        )
        write_csv(report.table, output / "validate.csv", metadata)
        write_effective_config(config, output)
        LOGGER.info("Validation table:\n%s", report.table.to_string(index=False))
        report.raise_for_failures()
        LOGGER.info("All validation checks passed")


command = Validate
