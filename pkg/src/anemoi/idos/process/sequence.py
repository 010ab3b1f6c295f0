# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
from collections.abc import Iterator
from dataclasses import dataclass
from typing import Union

import numpy as np

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.process.arrivals import InterArrivalModel
from anemoi.idos.process.kernels import RevelationKernel
from anemoi.idos.process.kernels import TypeTargetKernel
from anemoi.idos.process.types import AttackEvent
from anemoi.idos.process.types import AttackState

LOGGER = logging.getLogger(__name__)

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


@dataclass(frozen=True, eq=False)
class AttackSequence:
    """Arrivals of one attack sequence, stored column-wise.

    Parameters
    ----------
    states : tuple[AttackState, ...]
        Hidden state space.
    times : np.ndarray
        Arrival times in seconds, strictly increasing.
    indices : np.ndarray
        Index into ``states`` of every arrival.

    """

    states: tuple[AttackState, ...]
    times: np.ndarray
    indices: np.ndarray

    def __len__(self) -> int:
        return int(self.times.size)

    def __getitem__(self, k: int) -> AttackEvent:
        state = self.states[int(self.indices[k])]
        return AttackEvent(stage=int(k), time=float(self.times[k]), type=state.type, target=state.target)

    def __iter__(self) -> Iterator[AttackEvent]:
        for k in range(len(self)):
            yield self[k]

    @property
    def intervals(self) -> np.ndarray:
        """Inter-arrival times, the first measured from time 0."""
        return np.diff(self.times, prepend=0.0)


def _sample_chain(cumulative: np.ndarray, start: int, uniforms: np.ndarray) -> np.ndarray:
    n = cumulative.shape[1]
    if np.all(cumulative == cumulative[0]):
        return np.minimum(np.searchsorted(cumulative[0], uniforms, side="right"), n - 1)

    indices = np.empty(uniforms.size, dtype=np.int64)
    previous = start
    for k, u in enumerate(uniforms):
        previous = min(int(np.searchsorted(cumulative[previous], u, side="right")), n - 1)
        indices[k] = previous
    return indices


def sample_attack_sequence(
    kernel: TypeTargetKernel,
    arrivals: InterArrivalModel,
    initial: AttackState,
    horizon: int,
    seed: SeedLike = None,
) -> AttackSequence:
    """Sample ``horizon`` arrivals of the Markov renewal attack process.

    The initial pair acts as the state preceding event 0, so the first arrival time
    follows the initial pair's inter-arrival law starting at 0.

    Parameters
    ----------
    kernel : TypeTargetKernel
        Type/target transition kernel.
    arrivals : InterArrivalModel
        Inter-arrival law.
    initial : AttackState
        State preceding the first arrival.
    horizon : int
        Number of arrivals ``K``.
    seed : int, SeedSequence or Generator, optional
        Source of randomness, a Generator is used as is, by default None

    Returns
    -------
    AttackSequence
        ``horizon`` arrivals with strictly increasing times.

    """
    if horizon < 0:
        msg = f"Horizon must be non-negative, got {horizon}"
        raise ConfigurationError(msg, location="sim.horizon")
    if arrivals.states != kernel.states:
        msg = "Inter-arrival model and attack kernel use different state spaces."
        raise ConfigurationError(msg, location="process.arrivals")

    rng = np.random.default_rng(seed)
    start = kernel.index(initial)

    uniforms = rng.random(horizon)
    indices = _sample_chain(np.cumsum(kernel.matrix, axis=1), start, uniforms)
    previous = np.concatenate(([start], indices[:-1])) if horizon else indices
    intervals = arrivals.sample(previous, indices, rng)

    times = np.cumsum(intervals)
    # a zero interval is possible in floating point, nudge to keep the order strict
    for k in np.flatnonzero(np.diff(times) <= 0.0) + 1:
        times[k] = np.nextafter(times[k - 1], np.inf)
    return AttackSequence(kernel.states, times, indices)


def reveal_labels(sequence: AttackSequence, revelation: RevelationKernel, seed: SeedLike = None) -> np.ndarray:
    """Draw the category label index of every arrival from ``o(. | theta, phi)``."""
    rng = np.random.default_rng(seed)
    cumulative = np.cumsum(revelation.matrix, axis=1)[sequence.indices]
    uniforms = rng.random(len(sequence))
    labels = (uniforms[:, None] >= cumulative).sum(axis=1)
    return np.minimum(labels, len(revelation.labels) - 1)
