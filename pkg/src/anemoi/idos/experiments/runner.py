# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Learning and evaluation phases shared by every command and experiment."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from tqdm import tqdm

from anemoi.idos.management.policy import Policy
from anemoi.idos.management.policy import default_policy
from anemoi.idos.management.policy import fixed_policy
from anemoi.idos.management.policy import greedy_policy
from anemoi.idos.management.qtable import QTable
from anemoi.idos.simulation.engine import EvaluateMode
from anemoi.idos.simulation.engine import LearnMode
from anemoi.idos.simulation.engine import run_episode
from anemoi.idos.simulation.log import EpisodeLog
from anemoi.idos.simulation.scenario import Scenario
from anemoi.idos.utils.parallel import map_ordered
from anemoi.idos.utils.seeding import episode_seed

LOGGER = logging.getLogger(__name__)

LEARN_PHASE = 0
EVALUATE_PHASE = 1


@dataclass(frozen=True, eq=False)
class LearningResult:
    """Outcome of the exploration phase.

    Attributes
    ----------
    qtable : QTable
        Learned table.
    policy : Policy
        Greedy policy of the learned table.
    converged : bool
        The greedy policy stayed the same over the last ``convergence_window`` episodes.
    history : pd.DataFrame
        ``episode``, ``label``, ``estimate`` (smallest Q value) and ``action`` (greedy
        action) after every exploration episode.
    warm_start : bool
        Learning started from an existing table.

    """

    qtable: QTable
    policy: Policy
    converged: bool
    history: pd.DataFrame
    warm_start: bool = False


def initial_qtable(scenario: Scenario) -> QTable:
    """Empty table, or the one ``am.resume`` points to."""
    if scenario.am.resume:
        LOGGER.info("Resuming learning from %s", scenario.am.resume)
        return QTable.load(Path(scenario.am.resume), scenario.label_keys)
    return QTable(scenario.label_keys, scenario.am.max_deemphasis)


def learn(
    scenario: Scenario,
    qtable: QTable | None = None,
    episodes: int | None = None,
    point: int = 0,
    progress: bool = False,
) -> LearningResult:
    """Explore for ``episodes`` shifts, updating the Q table after every inspection.

    Parameters
    ----------
    scenario : Scenario
        Validated scenario.
    qtable : QTable, optional
        Table to continue from, copied first. ``am.resume`` or an empty table otherwise.
    episodes : int, optional
        Exploration episodes, by default ``am.exploration_episodes``
    point : int, optional
        Sweep point index, part of every episode's stream address.
    progress : bool, optional
        Show a progress bar, by default False

    """
    warm_start = qtable is not None or bool(scenario.am.resume)
    table = qtable.copy() if qtable is not None else initial_qtable(scenario)
    episodes = scenario.am.exploration_episodes if episodes is None else int(episodes)
    mode = LearnMode(table)

    rows = []
    policies = []
    for e in tqdm(range(episodes), desc="learn", disable=not progress):
        run_episode(scenario, mode, episode_seed(scenario.seed, point, LEARN_PHASE, e))
        greedy = greedy_policy(table)
        policies.append(greedy.actions)
        for i, label in enumerate(table.labels):
            rows.append({"episode": e, "label": label, "estimate": table.values[i].min(), "action": greedy.actions[i]})

    window = scenario.am.convergence_window
    converged = len(policies) >= window and len(set(policies[-window:])) == 1
    if not converged:
        LOGGER.warning("Greedy policy has not settled over the last %d exploration episodes.", window)
    policy = greedy_policy(table)
    LOGGER.info("Learning finished after %d episodes, greedy policy %s", episodes, policy.as_dict())
    return LearningResult(
        table,
        policy,
        converged,
        pd.DataFrame(rows, columns=["episode", "label", "estimate", "action"]),
        warm_start,
    )


def _evaluate_one(
    scenario: Scenario,
    policy: Policy,
    qtable: QTable | None,
    seed: np.random.SeedSequence,
) -> EpisodeLog:
    return run_episode(scenario, EvaluateMode(policy, qtable), seed)


def evaluate(
    scenario: Scenario,
    policies: Sequence[Policy],
    episodes: int | None = None,
    point: int = 0,
    qtable: QTable | None = None,
    num_workers: int = 1,
) -> list[EpisodeLog]:
    """Run every policy over the same episode streams.

    Episode ``e`` of every policy sees the same attack sequence, which keeps policy
    comparisons paired.
    """
    episodes = scenario.am.evaluation_episodes if episodes is None else int(episodes)
    tasks = [
        (scenario, policy, qtable, episode_seed(scenario.seed, point, EVALUATE_PHASE, e))
        for policy in policies
        for e in range(episodes)
    ]
    logs = map_ordered(_evaluate_one, tasks, num_workers)
    LOGGER.info("Evaluated %d policies over %d episodes", len(policies), episodes)
    return logs


def comparison_policies(
    labels: Sequence[str],
    learned: Policy | None = None,
    default: bool = True,
    fixed: Sequence[int] = (),
) -> list[Policy]:
    """The learned policy, the default one and any fixed-action ones, in that order."""
    policies = [] if learned is None else [learned]
    if default:
        policies.append(default_policy(labels))
    policies.extend(fixed_policy(labels, m) for m in fixed)
    return policies
