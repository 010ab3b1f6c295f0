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

from anemoi.idos.commands import ScenarioCommand
from anemoi.idos.diagnostics.tracking import get_tracker
from anemoi.idos.experiments.sweeps import EXPERIMENTS
from anemoi.idos.experiments.sweeps import run_experiment
from anemoi.idos.experiments.sweeps import save_experiment

if TYPE_CHECKING:
    import argparse

    from omegaconf import DictConfig

LOGGER = logging.getLogger(__name__)


class Sweep(ScenarioCommand):
    """Run one of the experiments over its parameter grid."""

    episodes_keys = ("sweep.exploration_episodes", "sweep.evaluation_episodes")

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        parser.add_argument("name", choices=EXPERIMENTS, help="Experiment")
        parser.add_argument(
            "--variant",
            help="Sweep config to use instead of the one named after the experiment, e.g. feint_sweep_high",
        )
        return super().add_arguments(parser)

    def overrides(self, args: argparse.Namespace, unknown_args: list[str] | None) -> list[str]:
        return [f"sweep={args.variant or args.name}", *super().overrides(args, unknown_args)]

    def execute(self, config: DictConfig, args: argparse.Namespace) -> None:
        tracker = get_tracker(config)
        result = run_experiment(args.name, config, num_workers=self.num_workers(config), tracker=tracker)
        paths = save_experiment(result, self.output_dir(config), config)
        LOGGER.info("Experiment %s written to %s", args.name, [str(p) for p in paths])
        if tracker is not None:
            for path in paths:
                tracker.log_artifact(path)
            tracker.finalize()


command = Sweep
