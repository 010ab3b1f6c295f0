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
from anemoi.idos.diagnostics.tracking import get_tracker
from anemoi.idos.experiments.reporting import artifact_metadata
from anemoi.idos.experiments.reporting import write_csv
from anemoi.idos.experiments.reporting import write_effective_config
from anemoi.idos.experiments.runner import comparison_policies
from anemoi.idos.experiments.runner import evaluate
from anemoi.idos.experiments.runner import learn
from anemoi.idos.management.policy import regret_report
from anemoi.idos.simulation.estimators import risk_report
from anemoi.idos.simulation.scenario import load_scenario

if TYPE_CHECKING:
    import argparse

    from omegaconf import DictConfig

LOGGER = logging.getLogger(__name__)


class Learn(ScenarioCommand):
    """Learn the attention-management strategy, then compare it with the default one."""

    episodes_keys = ("am.exploration_episodes",)

    @classmethod
    def add_arguments(cls, parser: argparse.ArgumentParser) -> argparse.ArgumentParser:
        super().add_arguments(parser)
        parser.add_argument("--resume", help="Q table to continue learning from")
        return parser

    def overrides(self, args: argparse.Namespace, unknown_args: list[str] | None) -> list[str]:
        overrides = super().overrides(args, unknown_args)
        if args.resume:
            overrides.insert(0, f"am.resume={args.resume}")
        return overrides

    def execute(self, config: DictConfig, args: argparse.Namespace) -> None:
        del args  # unused
        scenario = load_scenario(config)
        tracker = get_tracker(config)
        output = self.output_dir(config)

        result = learn(scenario, progress=self.progress(config))
        policies = comparison_policies(scenario.label_keys, learned=result.policy)
        logs = evaluate(scenario, policies, qtable=result.qtable, num_workers=self.num_workers(config))
        estimator = OmegaConf.select(config, "sim.estimator", default="first")
        truncation = float(OmegaConf.select(config, "sim.truncation", default=1e-3))
        risks = risk_report(logs, scenario.am.gamma, scenario.label_keys, mode=estimator, truncation=truncation)

        metadata = artifact_metadata(
            scenario.digest,
            scenario.seed,
            experiment="learn",
            gamma=scenario.am.gamma,
            exploration_episodes=scenario.am.exploration_episodes,
            evaluation_episodes=scenario.am.evaluation_episodes,
            converged=result.converged,
            warm_start=result.warm_start,
            policy=result.policy.as_dict(),
        )
        result.qtable.save(
            output / "qtable.tsv",
            {"seed": str(scenario.seed), "digest": scenario.digest, "converged": str(result.converged)},
        )
        paths = [
            write_csv(risks, output / "learn-risk.csv", metadata),
            write_csv(result.history, output / "learn-history.csv", metadata),
            write_csv(regret_report(result.qtable), output / "learn-regret.csv", metadata),
            write_effective_config(config, output),
        ]
        LOGGER.info("Greedy policy: %s", result.policy.as_dict())
        LOGGER.info("Risk per label:\n%s", risks.to_string(index=False))

        if tracker is not None:
            for _, row in risks[~risks["insufficient"]].iterrows():
                tracker.log_metrics({f"{row['label']}.risk_{row['policy']}": row["risk"]})
            for path in paths:
                tracker.log_artifact(path)
            tracker.finalize()


command = Learn
