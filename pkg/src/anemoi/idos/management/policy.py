# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.management.qtable import QTable
from anemoi.idos.process.sequence import SeedLike

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class AmAction:
    """De-emphasize the next ``m`` alerts after an inspection starts."""

    m: int

    def __post_init__(self) -> None:
        if self.m < 0:
            msg = f"De-emphasis count must be non-negative, got {self.m}"
            raise ConfigurationError(msg, location="am")

    def __str__(self) -> str:
        return f"a_{self.m}"


@dataclass(frozen=True)
class Policy:
    """Stationary attention-management strategy, one action per label.

    Parameters
    ----------
    name : str
        Tag used in reports (``optimal``, ``default``, ``fixed_2``).
    labels : tuple[str, ...]
        Category label keys.
    actions : tuple[int, ...]
        De-emphasis count per label.

    """

    name: str
    labels: tuple[str, ...]
    actions: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.actions):
            msg = "A policy needs exactly one action per category label."
            raise ConfigurationError(msg, location="am")

    def __call__(self, label: int | str) -> AmAction:
        index = self.labels.index(label) if isinstance(label, str) else int(label)
        return AmAction(self.actions[index])

    def as_dict(self) -> dict[str, int]:
        return dict(zip(self.labels, self.actions))


def _argmin(row: np.ndarray) -> int:
    # np.argmin returns the first minimum, the smallest de-emphasis on ties
    return int(np.argmin(row))


def select_action(table: QTable, label: int, epsilon: float, seed: SeedLike = None) -> AmAction:
    """Epsilon-greedy action on the Q table.

    With probability ``epsilon`` an action is drawn uniformly, otherwise the one with the
    smallest estimate is taken, ties going to the smallest ``m``.
    """
    if not 0.0 <= epsilon <= 1.0:
        msg = f"Exploration rate must lie in [0, 1], got {epsilon}"
        raise ConfigurationError(msg, location="am.epsilon")
    rng = np.random.default_rng(seed)
    if epsilon > 0.0 and rng.random() < epsilon:
        return AmAction(int(rng.integers(table.n_actions)))
    return AmAction(_argmin(table.values[label]))


def greedy_policy(table: QTable) -> Policy:
    return Policy("optimal", tuple(table.labels), tuple(_argmin(row) for row in table.values))


def default_policy(labels: Sequence[str]) -> Policy:
    """No de-emphasis for any label."""
    return Policy("default", tuple(labels), (0,) * len(labels))


def fixed_policy(labels: Sequence[str], m: int) -> Policy:
    return Policy(f"fixed_{m}", tuple(labels), (int(m),) * len(labels))


def regret_report(table: QTable) -> pd.DataFrame:
    """Cost of deviating from the greedy action, per label and action.

    Small regrets mark actions that can replace the optimal one at about the same risk.
    """
    best = table.values.min(axis=1, keepdims=True)
    regret = table.values - best
    rows = [
        {"label": label, "action": m, "estimate": table.values[i, m], "regret": regret[i, m]}
        for i, label in enumerate(table.labels)
        for m in range(table.n_actions)
    ]
    return pd.DataFrame(rows)
