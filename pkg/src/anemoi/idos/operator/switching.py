# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Operator decisions to abandon the inspection in progress for a new alert."""

from __future__ import annotations

import logging
from abc import ABC
from abc import abstractmethod
from collections.abc import Mapping
from collections.abc import Sequence
from fnmatch import fnmatchcase

import numpy as np

from anemoi.idos.errors import ConfigurationError

LOGGER = logging.getLogger(__name__)

TOLERANCE = 1e-9


def match_labels(labels: Sequence[str], pattern: str) -> list[int]:
    """Indices of the labels matching ``pattern``."""
    matches = [i for i, label in enumerate(labels) if fnmatchcase(label, str(pattern))]
    if not matches:
        msg = f"Pattern '{pattern}' matches no category label of {list(labels)}"
        raise ConfigurationError(msg, location="operator.switching")
    return matches


def _marginal(labels: Sequence[str], marginal: Sequence[float] | None) -> np.ndarray:
    if marginal is None:
        return np.full(len(labels), 1.0 / max(len(labels), 1))
    return np.asarray(marginal, dtype=float)


class BaseSwitching(ABC):
    """Switching behaviour of an operator.

    Parameters
    ----------
    labels : Sequence[str]
        Category label keys, in label-index order.
    marginal : Sequence[float], optional
        Stationary probability of each label, uniform when not given.

    """

    def __init__(self, labels: Sequence[str] = (), marginal: Sequence[float] | None = None) -> None:
        self.labels = [str(label) for label in labels]
        self.marginal = _marginal(self.labels, marginal)

    def _match(self, pattern: str) -> list[int]:
        return match_labels(self.labels, pattern)

    @abstractmethod
    def switch(self, current: int, elapsed: int, new: int, emphasized: bool, rng: np.random.Generator) -> bool:
        """Whether the operator drops the inspected alert for the new one.

        Parameters
        ----------
        current : int
            Label index of the alert under inspection.
        elapsed : int
            Arrivals since the inspection started, the new one included.
        new : int
            Label index of the new alert.
        emphasized : bool
            False when the alert is de-emphasized by the attention manager.
        rng : np.random.Generator
            Random stream of the episode.

        """

    @abstractmethod
    def picks_up_when_idle(self, emphasized: bool) -> bool:
        """Whether an idle operator notices an arrival."""


class AmbitiousSwitching(BaseSwitching):
    """Switches to every emphasized alert and never notices de-emphasized ones."""

    def switch(self, current: int, elapsed: int, new: int, emphasized: bool, rng: np.random.Generator) -> bool:
        del current, elapsed, new, rng  # unused
        return emphasized

    def picks_up_when_idle(self, emphasized: bool) -> bool:
        return emphasized


class TabularSwitching(BaseSwitching):
    """Switching drawn from a first-switch kernel.

    ``kappa[s, j, s']`` is the probability that the first switch away from an
    inspection of label ``s`` happens at the ``j + 1``-th arrival and goes to label
    ``s'``. Mass left over after the table horizon never switches. At each arrival the
    switch is a Bernoulli draw with the conditional probability
    ``kappa / (survival * marginal(s'))``. De-emphasized alerts never attract a switch,
    while an idle operator picks up any arrival.

    Parameters
    ----------
    table : Mapping, optional
        ``table[current][delta_k][new]`` probabilities, ``current`` and ``new`` being
        label patterns. Mass given to a pattern matching several labels is shared in
        proportion to their marginal probability. Later entries take precedence.
    labels : Sequence[str]
        Category label keys, in label-index order.
    marginal : Sequence[float], optional
        Stationary probability of each label.
    kappa : np.ndarray, optional
        Ready-made first-switch kernel, used instead of ``table``.

    """

    def __init__(
        self,
        table: Mapping[str, Mapping[int, Mapping[str, float]]] | None = None,
        labels: Sequence[str] = (),
        marginal: Sequence[float] | None = None,
        kappa: np.ndarray | None = None,
    ) -> None:
        super().__init__(labels, marginal)
        if kappa is None:
            kappa = self._kappa_from_table(table or {})
        self.kappa = np.asarray(kappa, dtype=float)
        self._validate()
        self.probabilities = self._conditional_probabilities()

    @classmethod
    def from_hazards(
        cls,
        hazards: Mapping[str, Mapping[str, float]],
        labels: Sequence[str] = (),
        marginal: Sequence[float] | None = None,
        horizon: int = 50,
    ) -> TabularSwitching:
        """Build the first-switch kernel from per-arrival switching probabilities.

        Parameters
        ----------
        hazards : Mapping[str, Mapping[str, float]]
            ``hazards[current][new]``: probability of switching to an arriving alert of
            label ``new`` while inspecting one of label ``current``, label patterns
            allowed. Later entries take precedence, unlisted pairs never switch.
        labels : Sequence[str]
            Category label keys, in label-index order.
        marginal : Sequence[float], optional
            Stationary probability of each label.
        horizon : int, optional
            Number of arrivals tabulated, by default 50

        """
        labels = [str(label) for label in labels]
        weights = _marginal(labels, marginal)
        n = len(labels)
        hazard = np.zeros((n, n))
        for current, row in hazards.items():
            for new, value in row.items():
                if not 0.0 <= float(value) <= 1.0:
                    msg = f"Switching probability {current} -> {new} must lie in [0, 1], got {value}"
                    raise ConfigurationError(msg, location="operator.switching.hazards")
                hazard[np.ix_(match_labels(labels, current), match_labels(labels, new))] = float(value)

        kappa = np.zeros((n, int(horizon), n))
        survival = np.ones(n)
        per_arrival = hazard * weights[None, :]
        for j in range(int(horizon)):
            kappa[:, j, :] = survival[:, None] * per_arrival
            survival = survival * (1.0 - per_arrival.sum(axis=1))
        return cls(labels=labels, marginal=weights, kappa=kappa)

    def _kappa_from_table(self, table: Mapping[str, Mapping[int, Mapping[str, float]]]) -> np.ndarray:
        n = len(self.labels)
        horizon = max((int(delta) for row in table.values() for delta in row), default=0)
        kappa = np.zeros((n, horizon, n))
        for current, row in table.items():
            for delta, destinations in row.items():
                if int(delta) < 1:
                    msg = f"Arrival offsets start at 1, got {delta}"
                    raise ConfigurationError(msg, location="operator.switching.table")
                for new, value in destinations.items():
                    targets = self._match(new)
                    weights = self.marginal[targets]
                    share = weights / weights.sum() if weights.sum() > 0 else np.full(len(targets), 1.0 / len(targets))
                    for c in self._match(current):
                        kappa[c, int(delta) - 1, targets] = float(value) * share
        return kappa

    def _validate(self) -> None:
        n = len(self.labels)
        if self.kappa.ndim != 3 or self.kappa.shape[0] != n or self.kappa.shape[2] != n:
            msg = f"Switching kernel has shape {self.kappa.shape}, expected ({n}, horizon, {n})."
            raise ConfigurationError(msg, location="operator.switching")
        if np.any(self.kappa < -TOLERANCE) or np.any(self.kappa > 1.0 + TOLERANCE):
            msg = "Switching probabilities must lie in [0, 1]."
            raise ConfigurationError(msg, location="operator.switching")
        totals = self.kappa.sum(axis=(1, 2))
        if np.any(totals > 1.0 + TOLERANCE):
            bad = [self.labels[i] for i in np.flatnonzero(totals > 1.0 + TOLERANCE)]
            msg = f"Switching mass exceeds 1 for labels {bad}, leaving a negative terminal mass."
            raise ConfigurationError(msg, location="operator.switching")

    def _conditional_probabilities(self) -> np.ndarray:
        first_switch = self.kappa.sum(axis=2)
        survival = 1.0 - (np.cumsum(first_switch, axis=1) - first_switch)
        denominator = survival[:, :, None] * self.marginal[None, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            probabilities = np.where(denominator > 0.0, self.kappa / denominator, 0.0)
        if np.any(probabilities > 1.0 + 1e-6):
            LOGGER.warning("Some switching probabilities exceed 1 and are clamped, the kernel is not fully realisable.")
        return np.clip(probabilities, 0.0, 1.0)

    @property
    def horizon(self) -> int:
        return int(self.kappa.shape[1])

    @property
    def terminal_mass(self) -> np.ndarray:
        """Probability of never switching, per label under inspection."""
        return 1.0 - self.kappa.sum(axis=(1, 2))

    def switch(self, current: int, elapsed: int, new: int, emphasized: bool, rng: np.random.Generator) -> bool:
        if not emphasized or not 1 <= elapsed <= self.horizon:
            return False
        probability = self.probabilities[current, elapsed - 1, new]
        if probability <= 0.0:
            return False
        return probability >= 1.0 or rng.random() < probability

    def picks_up_when_idle(self, emphasized: bool) -> bool:
        del emphasized  # unused
        return True
