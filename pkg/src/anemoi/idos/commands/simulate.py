# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
import re
from typing import TYPE_CHECKING

from omegaconf import OmegaConf

from anemoi.idos.commands import ScenarioCommand
from anemoi.idos.errors import ConfigurationError
from anemoi.idos.experiments.reporting import artifact_metadata
from anemoi.idos.experiments.reporting import write_csv
from anemoi.idos.experiments.reporting import write_effective_config
from anemoi.idos.experiments.runner import evaluate
from anemoi.idos.management.policy import Policy
from anemoi.idos.management.policy import default_policy
from anemoi.idos.management.policy import fixed_policy
from anemoi.idos.management.policy import greedy_policy
from anemoi.idos.management.qtable import QTable
from anemoi.idos.simulation.estimators import risk_report
from anemoi.idos.simulation.log import write_episode_log
from anemoi.idos.simulation.scenario import Scenario
from anemoi.idos.simulation.scenario import load_scenario

if TYPE_CHECKING:
    import argparse

    from omegaconf import DictConfig

LOGGER = logging.getLogger(__name__)


def resolve_policy(scenario: Scenario, name: str, qtable: QTable | None) -> Policy:
    """Policy from its tag: ``default``, ``fixed_<m>`` or ``optimal`` (greedy on ``qtable``)."""
    if name == "default":
        return default_policy(scenario.label_keys)
    if match := re.fullmatch(r"fixed_(\d+)", name):
        return fixed_policy(scenario.label_keys, int(match.group(1)))
    if name == "optimal":
        if qtable is None:
            msg = "The optimal policy needs a learned Q table, pass --qtable."
            raise ConfigurationError(msg, location="policy")
        return greedy_policy(qtable)
    msg = f"Unknown policy '{name}', expected default, fixed_<m> or optimal"
    raise ConfigurationError(msg, location="policy")


class Simulate(ScenarioCommand):
    """Run episodes under a fixed policy and report the risk per label."""

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        super().add_arguments(parser)
        parser.add_argument("--policy", default="default", help="default, fixed_<m> or optimal")
        parser.add_argument("--qtable", help="Q table read for the optimal policy")
        parser.add_argument("--trace", action="store_true", help="Write the per-stage log of every episode")
        return parser

    def execute(self, config: DictConfig, args: argparse.Namespace) -> None:
        scenario = load_scenario(config)
        qtable = QTable.load(args.qtable, scenario.label_keys) if args.qtable else None
        policy = resolve_policy(scenario, args.policy, qtable)
        logs = evaluate(scenario, [policy], qtable=qtable, num_workers=self.num_workers(config))

        output = self.output_dir(config)
        estimator = OmegaConf.select(config, "sim.estimator", default="first")
        truncation = float(OmegaConf.select(config, "sim.truncation", default=1e-3))
        table = risk_report(logs, scenario.am.gamma, scenario.label_keys, mode=estimator, truncation=truncation)
        metadata = artifact_metadata(
            scenario.digest,
            scenario.seed,
            experiment="simulate",
            policy=policy.as_dict(),
            gamma=scenario.am.gamma,
            evaluation_episodes=len(logs),
            estimator=estimator,
        )
        write_csv(table, output / f"simulate-{policy.name}.csv", metadata)
        write_effective_config(config, output)
        if args.trace:
            for e, log in enumerate(logs):
                write_episode_log(log, output / "traces" / f"{policy.name}-{e:04d}.jsonl")
        LOGGER.info("Risk per label under %s:\n%s", policy.name, table.to_string(index=False))


command = Simulate
