# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import enum
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from anemoi.idos.errors import ConfigurationError

LOGGER = logging.getLogger(__name__)

QTABLE_FORMAT = "anemoi-idos-qtable"
QTABLE_VERSION = 1


class CountMode(str, enum.Enum):
    """Counter driving the learning rate."""

    LABEL = "label"
    PAIR = "pair"


def learning_rate(kc: float, visits: int) -> float:
    """Learning rate ``kc / (visits - 1 + kc)``.

    Parameters
    ----------
    kc : float
        Strictly positive constant.
    visits : int
        Visit count including the current one, at least 1.

    """
    if not kc > 0:
        msg = f"kc must be strictly positive, got {kc}"
        raise ConfigurationError(msg, location="am.kc")
    if visits < 1:
        msg = f"Visit counts start at 1, got {visits}"
        raise ValueError(msg)
    return kc / (visits - 1 + kc)


class QTable:
    """Estimated expected cumulative cost per (label, action).

    Parameters
    ----------
    labels : Sequence[str]
        Category label keys.
    max_deemphasis : int
        Largest number ``M`` of de-emphasized alerts, actions are ``0..M``.
    initial : float, optional
        Initial estimate, by default 0.0

    """

    def __init__(self, labels: Sequence[str], max_deemphasis: int, initial: float = 0.0) -> None:
        if max_deemphasis < 0:
            msg = f"The largest de-emphasis must be non-negative, got {max_deemphasis}"
            raise ConfigurationError(msg, location="am.max_deemphasis")
        self.labels = [str(label) for label in labels]
        self.values = np.full((len(self.labels), max_deemphasis + 1), float(initial))
        self.label_visits = np.zeros(len(self.labels), dtype=np.int64)
        self.pair_visits = np.zeros_like(self.values, dtype=np.int64)

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def copy(self) -> QTable:
        clone = QTable(self.labels, self.n_actions - 1)
        clone.values = self.values.copy()
        clone.label_visits = self.label_visits.copy()
        clone.pair_visits = self.pair_visits.copy()
        return clone

    def next_visit(self, label: int, action: int, mode: CountMode = CountMode.LABEL) -> int:
        """Visit count the coming update will carry."""
        if mode is CountMode.PAIR:
            return int(self.pair_visits[label, action]) + 1
        return int(self.label_visits[label]) + 1

    def __getitem__(self, label: int) -> np.ndarray:
        return self.values[label]

    def save(self, path: Path | str, metadata: dict[str, str] | None = None) -> None:
        """Write the table as tab-separated ``label action value visits`` rows."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"# {QTABLE_FORMAT} v{QTABLE_VERSION}"]
        lines.extend(f"# {key}: {value}" for key, value in (metadata or {}).items())
        lines.append("label\taction\tvalue\tvisits\tlabel_visits")
        for i, label in enumerate(self.labels):
            for m in range(self.n_actions):
                lines.append(
                    f"{label}\t{m}\t{self.values[i, m]!r}\t{self.pair_visits[i, m]}\t{self.label_visits[i]}",
                )
        path.write_text("\n".join(lines) + "\n")
        LOGGER.info("Q table written to %s", path)

    @classmethod
    def load(cls, path: Path | str, labels: Sequence[str] | None = None) -> QTable:
        """Read a table written by ``save``.

        Parameters
        ----------
        path : Path | str
            File to read.
        labels : Sequence[str], optional
            Expected label order, the file order is kept when not given.

        """
        path = Path(path)
        rows = []
        header_seen = False
        for raw in path.read_text().splitlines():
            if raw.startswith("#"):
                if raw.startswith(f"# {QTABLE_FORMAT}") and not raw.endswith(f"v{QTABLE_VERSION}"):
                    msg = f"Unsupported Q table version in {path}: {raw}"
                    raise ConfigurationError(msg, location="am.resume")
                continue
            if not header_seen:
                header_seen = True
                continue
            if raw.strip():
                label, action, value, visits, label_visits = raw.split("\t")
                rows.append((label, int(action), float(value), int(visits), int(label_visits)))

        file_labels = list(dict.fromkeys(row[0] for row in rows))
        order = list(labels) if labels is not None else file_labels
        if set(order) != set(file_labels):
            msg = f"Q table labels {file_labels} do not match the scenario labels {order}"
            raise ConfigurationError(msg, location="am.resume")

        table = cls(order, max(row[1] for row in rows))
        for label, action, value, visits, label_visits in rows:
            i = order.index(label)
            table.values[i, action] = value
            table.pair_visits[i, action] = visits
            table.label_visits[i] = label_visits
        LOGGER.info("Q table read from %s", path)
        return table


def q_update(
    table: QTable,
    label: int,
    action: int,
    cost: float,
    next_label: int,
    alpha: float,
    gamma: float,
) -> QTable:
    """One Q-learning step on the ``(label, action)`` entry.

    ``Q[s, a] <- (1 - alpha) Q[s, a] + alpha (cost + gamma min_a' Q[s', a'])``; visit
    counts of the entry are incremented.
    """
    target = cost + gamma * table.values[next_label].min()
    table.values[label, action] = (1.0 - alpha) * table.values[label, action] + alpha * target
    table.label_visits[label] += 1
    table.pair_visits[label, action] += 1
    return table
