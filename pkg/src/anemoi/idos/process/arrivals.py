# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import enum
import logging
from collections.abc import Mapping
from dataclasses import dataclass
from dataclasses import replace

import numpy as np

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.process.kernels import StationaryDistribution
from anemoi.idos.process.kernels import TypeTargetKernel
from anemoi.idos.process.types import AttackState
from anemoi.idos.process.types import AttackType

LOGGER = logging.getLogger(__name__)


class ArrivalMode(str, enum.Enum):
    """How the inter-arrival law is indexed."""

    POISSON = "poisson"
    TYPE_PAIR = "type_pair"
    FULL = "full"


@dataclass(frozen=True, eq=False)
class InterArrivalModel:
    """Law of the time between consecutive attacks.

    Inter-arrival times are gamma distributed with mean ``means[i, j]`` when moving
    from ``states[i]`` to ``states[j]``. A shape of 1 gives the exponential law.

    Parameters
    ----------
    states : tuple[AttackState, ...]
        Hidden state space, ordered as in the attack kernel.
    means : np.ndarray
        Mean inter-arrival time in seconds per (previous, next) state.
    mode : ArrivalMode
        Indexing the model was declared with.
    shape : float, optional
        Gamma shape parameter, by default 1.0

    """

    states: tuple[AttackState, ...]
    means: np.ndarray
    mode: ArrivalMode = ArrivalMode.FULL
    shape: float = 1.0

    def __post_init__(self) -> None:
        n = len(self.states)
        if self.means.shape != (n, n):
            msg = f"Mean table has shape {self.means.shape}, expected ({n}, {n})."
            raise ConfigurationError(msg, location="process.arrivals")
        if not np.all(np.isfinite(self.means)) or np.any(self.means <= 0.0):
            msg = "Mean inter-arrival times must be finite and strictly positive."
            raise ConfigurationError(msg, location="process.arrivals")
        if not self.shape > 0.0:
            msg = f"Gamma shape must be strictly positive, got {self.shape}"
            raise ConfigurationError(msg, location="process.arrivals.shape")

    @classmethod
    def poisson(cls, states: tuple[AttackState, ...], rate: float) -> InterArrivalModel:
        """Single exponential rate for every transition."""
        if rate is None or not rate > 0.0:
            msg = f"Poisson mode needs a strictly positive rate, got {rate}"
            raise ConfigurationError(msg, location="process.arrivals.rate")
        n = len(states)
        return cls(states, np.full((n, n), 1.0 / float(rate)), ArrivalMode.POISSON)

    @classmethod
    def type_pair(
        cls,
        states: tuple[AttackState, ...],
        means: Mapping[str, Mapping[str, float]],
        shape: float = 1.0,
    ) -> InterArrivalModel:
        """Mean depending on the (previous type, next type) pair only.

        ``means[previous][next]`` is keyed by type names (``feint``, ``real``).
        """
        table = np.empty((len(states), len(states)))
        for i, previous in enumerate(states):
            for j, following in enumerate(states):
                try:
                    table[i, j] = float(means[previous.type.value][following.type.value])
                except KeyError:
                    msg = f"Missing mean inter-arrival time from '{previous.type.value}' to '{following.type.value}'"
                    raise ConfigurationError(msg, location="process.arrivals.means") from None
        return cls(states, table, ArrivalMode.TYPE_PAIR, shape)

    @classmethod
    def from_table(
        cls,
        states: tuple[AttackState, ...],
        means: Mapping[str, Mapping[str, float]],
        shape: float = 1.0,
    ) -> InterArrivalModel:
        """Mean per (previous pair, next pair), keyed ``"<type>/<target>"``."""
        table = np.empty((len(states), len(states)))
        for i, previous in enumerate(states):
            for j, following in enumerate(states):
                try:
                    table[i, j] = float(means[previous.key][following.key])
                except KeyError:
                    msg = f"Missing mean inter-arrival time from '{previous.key}' to '{following.key}'"
                    raise ConfigurationError(msg, location="process.arrivals.table") from None
        return cls(states, table, ArrivalMode.FULL, shape)

    @property
    def rate(self) -> float | None:
        """The single rate of a Poisson-mode model, ``None`` otherwise."""
        if self.mode is not ArrivalMode.POISSON or self.shape != 1.0:
            return None
        return float(1.0 / self.means[0, 0])

    def scaled(self, rho: float) -> InterArrivalModel:
        """Model with every mean multiplied by ``rho``."""
        if not rho > 0.0:
            msg = f"Frequency scaling factor must be strictly positive, got {rho}"
            raise ConfigurationError(msg, location="process.arrivals.scale")
        return replace(self, means=self.means * rho)

    def mean(self, previous: AttackState, following: AttackState) -> float:
        return float(self.means[self.states.index(previous), self.states.index(following)])

    def mean_by_type(self, previous: AttackType, following: AttackType) -> float:
        """Mean inter-arrival time averaged over targets, for reporting."""
        rows = [i for i, s in enumerate(self.states) if s.type is previous]
        cols = [j for j, s in enumerate(self.states) if s.type is following]
        return float(self.means[np.ix_(rows, cols)].mean())

    def stationary_mean(self, kernel: TypeTargetKernel, b: StationaryDistribution) -> float:
        """Long-run mean inter-arrival time, ``sum_ij b_i P_ij mu_ij``."""
        return float(b.probabilities @ (kernel.matrix * self.means).sum(axis=1))

    def sample(self, previous: np.ndarray, following: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Draw one inter-arrival time per (previous, next) index pair."""
        means = self.means[previous, following]
        if self.shape == 1.0:
            return rng.exponential(means)
        return rng.gamma(self.shape, means / self.shape)
