# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Probability objects of the attack chain and of the triage labels."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.errors import ConsistencyError
from anemoi.idos.errors import UndefinedLabelError
from anemoi.idos.process.types import AttackState
from anemoi.idos.process.types import AttackType
from anemoi.idos.process.types import CategoryLabel

LOGGER = logging.getLogger(__name__)

ROW_TOLERANCE = 1e-9
STATIONARY_TOLERANCE = 1e-8


def attack_states(targets: Sequence[str]) -> tuple[AttackState, ...]:
    """All (type, target) pairs, type-major."""
    if len(targets) == 0:
        msg = "At least one attack target must be declared."
        raise ConfigurationError(msg, location="process.targets")
    if len(set(targets)) != len(targets):
        msg = f"Attack targets must be unique, got {list(targets)}"
        raise ConfigurationError(msg, location="process.targets")
    return tuple(AttackState(attack_type, target) for attack_type in AttackType for target in targets)


def check_stochastic(matrix: np.ndarray, location: str, row_names: Sequence[str] | None = None) -> None:
    """Raise if ``matrix`` is not row-stochastic within ``ROW_TOLERANCE``."""
    if not np.all(np.isfinite(matrix)):
        msg = "Probabilities must be finite."
        raise ConfigurationError(msg, location=location)
    if np.any(matrix < -ROW_TOLERANCE) or np.any(matrix > 1 + ROW_TOLERANCE):
        msg = "Probabilities must lie in [0, 1]."
        raise ConfigurationError(msg, location=location)
    sums = matrix.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOLERANCE)
    if bad.size:
        names = [row_names[i] if row_names else str(i) for i in bad]
        msg = f"Rows {names} sum to {sums[bad].tolist()} instead of 1."
        raise ConfigurationError(msg, location=location)


def _resolve_label(labels: Sequence[CategoryLabel], index: Mapping[str, int], label: CategoryLabel | str | int) -> int:
    if isinstance(label, (int, np.integer)):
        if not 0 <= label < len(labels):
            msg = f"Label index {label} out of range."
            raise UndefinedLabelError(msg)
        return int(label)
    key = label.key if isinstance(label, CategoryLabel) else label
    try:
        return index[key]
    except KeyError:
        msg = f"Label '{key}' is not declared in the triage label set."
        raise UndefinedLabelError(msg) from None


@dataclass(frozen=True, eq=False)
class TypeTargetKernel:
    """Transition kernel of the hidden (type, target) chain.

    Parameters
    ----------
    states : tuple[AttackState, ...]
        Ordered state space.
    matrix : np.ndarray
        Row-stochastic matrix, ``matrix[i, j] = Pr(states[j] | states[i])``.

    """

    states: tuple[AttackState, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.states)
        if self.matrix.shape != (n, n):
            msg = f"Kernel has shape {self.matrix.shape}, expected ({n}, {n})."
            raise ConfigurationError(msg, location="process.kernel")
        check_stochastic(self.matrix, "process.kernel", [s.key for s in self.states])

    @classmethod
    def independent(
        cls,
        targets: Sequence[str],
        eta_fe: float,
        target_weights: Mapping[str, float] | None = None,
    ) -> TypeTargetKernel:
        """Kernel drawing each attack independently of the previous one.

        Parameters
        ----------
        targets : Sequence[str]
            Attack targets.
        eta_fe : float
            Probability that an attack is a feint.
        target_weights : Mapping[str, float], optional
            Target distribution, uniform when not given, by default None

        """
        if not 0.0 <= eta_fe <= 1.0:
            msg = f"eta_fe must lie in [0, 1], got {eta_fe}"
            raise ConfigurationError(msg, location="process.kernel.eta_fe")
        targets = list(targets)
        states = attack_states(targets)
        if target_weights is None:
            weights = np.full(len(targets), 1.0 / len(targets))
        else:
            unknown = set(target_weights) - set(targets)
            if unknown:
                msg = f"Unknown targets {sorted(unknown)}"
                raise ConfigurationError(msg, location="process.kernel.target_weights")
            weights = np.array([float(target_weights.get(t, 0.0)) for t in targets])
        type_probs = {AttackType.FEINT: eta_fe, AttackType.REAL: 1.0 - eta_fe}
        row = np.array([type_probs[s.type] * weights[targets.index(s.target)] for s in states])
        return cls(states, np.tile(row, (len(states), 1)))

    @classmethod
    def from_table(cls, targets: Sequence[str], table: Mapping[str, Mapping[str, float]]) -> TypeTargetKernel:
        """Kernel from rows keyed ``"<type>/<target>"``; omitted entries are zero."""
        states = attack_states(targets)
        index = {s.key: i for i, s in enumerate(states)}
        matrix = np.zeros((len(states), len(states)))
        for source, row in table.items():
            if source not in index:
                msg = f"Unknown attack state '{source}', expected one of {list(index)}"
                raise ConfigurationError(msg, location="process.kernel.table")
            for destination, value in row.items():
                if destination not in index:
                    msg = f"Unknown attack state '{destination}' in row '{source}'"
                    raise ConfigurationError(msg, location="process.kernel.table")
                matrix[index[source], index[destination]] = float(value)
        return cls(states, matrix)

    @cached_property
    def state_index(self) -> dict[AttackState, int]:
        return {state: i for i, state in enumerate(self.states)}

    def index(self, state: AttackState) -> int:
        try:
            return self.state_index[state]
        except KeyError:
            msg = f"Attack state {state} is not part of the kernel state space."
            raise ConfigurationError(msg, location="process.initial") from None


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    """Steady-state distribution ``b`` of the attack chain."""

    states: tuple[AttackState, ...]
    probabilities: np.ndarray

    def __getitem__(self, state: AttackState) -> float:
        return float(self.probabilities[self.states.index(state)])


def stationary_distribution(kernel: TypeTargetKernel) -> StationaryDistribution:
    """Compute the unique stationary distribution of the attack chain.

    The chain may have transient states, they receive zero mass. It must have exactly
    one closed communicating class.

    Parameters
    ----------
    kernel : TypeTargetKernel
        Attack chain kernel.

    Returns
    -------
    StationaryDistribution
        ``b`` with ``|b - b P|_1 <= 1e-8``.

    Raises
    ------
    ConfigurationError
        If the chain has several closed classes, hence no unique distribution.

    """
    matrix = kernel.matrix
    n = matrix.shape[0]
    n_components, component = connected_components(csr_matrix(matrix > 0), directed=True, connection="strong")

    closed = []
    for c in range(n_components):
        members = np.flatnonzero(component == c)
        others = np.flatnonzero(component != c)
        if others.size == 0 or matrix[np.ix_(members, others)].sum() == 0.0:
            closed.append(members)

    if len(closed) != 1:
        names = [[kernel.states[i].key for i in members] for members in closed]
        msg = f"The attack chain has {len(closed)} closed classes {names}, the stationary distribution is not unique."
        raise ConfigurationError(msg, location="process.kernel")

    members = closed[0]
    sub = matrix[np.ix_(members, members)]
    system = np.vstack([sub.T - np.eye(members.size), np.ones(members.size)])
    rhs = np.zeros(members.size + 1)
    rhs[-1] = 1.0
    solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    solution = np.clip(solution, 0.0, None)

    probabilities = np.zeros(n)
    probabilities[members] = solution / solution.sum()

    residual = np.abs(probabilities - probabilities @ matrix).sum()
    if residual > STATIONARY_TOLERANCE:
        msg = f"Stationary distribution residual {residual:.3e} exceeds {STATIONARY_TOLERANCE}"
        raise ConsistencyError(msg)

    LOGGER.debug("Stationary distribution: %s", dict(zip([s.key for s in kernel.states], probabilities.round(6))))
    return StationaryDistribution(kernel.states, probabilities)


@dataclass(frozen=True, eq=False)
class RevelationKernel:
    """Probability of each category label given the hidden (type, target).

    Parameters
    ----------
    states : tuple[AttackState, ...]
        Hidden state space, ordered as in the attack kernel.
    labels : tuple[CategoryLabel, ...]
        Declared label set.
    matrix : np.ndarray
        ``matrix[i, l] = o(labels[l] | states[i])``.

    """

    states: tuple[AttackState, ...]
    labels: tuple[CategoryLabel, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        shape = (len(self.states), len(self.labels))
        if self.matrix.shape != shape:
            msg = f"Revelation kernel has shape {self.matrix.shape}, expected {shape}."
            raise ConfigurationError(msg, location="triage.revelation")
        if len({label.key for label in self.labels}) != len(self.labels):
            msg = "Category labels must be unique."
            raise ConfigurationError(msg, location="triage")
        check_stochastic(self.matrix, "triage.revelation", [s.key for s in self.states])

    @classmethod
    def separable(
        cls,
        targets: Sequence[str],
        criticalities: Sequence[str],
        criticality: Mapping[str, Mapping[str, float]],
    ) -> RevelationKernel:
        """Source reveals the target exactly, criticality depends on the type only.

        Parameters
        ----------
        targets : Sequence[str]
            Attack targets, which double as alert sources.
        criticalities : Sequence[str]
            Criticality levels.
        criticality : Mapping[str, Mapping[str, float]]
            ``criticality[type][level]`` probabilities.

        """
        states = attack_states(targets)
        labels = tuple(CategoryLabel(source, level) for source in targets for level in criticalities)
        matrix = np.zeros((len(states), len(labels)))
        for i, state in enumerate(states):
            row = criticality.get(state.type.value)
            if row is None:
                msg = f"Missing criticality distribution for type '{state.type.value}'"
                raise ConfigurationError(msg, location="triage.revelation.criticality")
            unknown = set(row) - set(criticalities)
            if unknown:
                msg = f"Unknown criticality levels {sorted(unknown)}"
                raise ConfigurationError(msg, location="triage.revelation.criticality")
            for j, label in enumerate(labels):
                if label.source == state.target:
                    matrix[i, j] = float(row.get(label.criticality, 0.0))
        return cls(states, labels, matrix)

    @classmethod
    def from_table(
        cls,
        targets: Sequence[str],
        labels: Sequence[CategoryLabel],
        table: Mapping[str, Mapping[str, float]],
    ) -> RevelationKernel:
        """Kernel from rows keyed ``"<type>/<target>"`` mapping label keys to probabilities."""
        states = attack_states(targets)
        state_index = {s.key: i for i, s in enumerate(states)}
        label_index = {label.key: j for j, label in enumerate(labels)}
        matrix = np.zeros((len(states), len(labels)))
        for state_key, row in table.items():
            if state_key not in state_index:
                msg = f"Unknown attack state '{state_key}'"
                raise ConfigurationError(msg, location="triage.revelation.table")
            for label_key, value in row.items():
                if label_key not in label_index:
                    msg = f"Unknown category label '{label_key}' in row '{state_key}'"
                    raise ConfigurationError(msg, location="triage.revelation.table")
                matrix[state_index[state_key], label_index[label_key]] = float(value)
        return cls(states, tuple(labels), matrix)

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {label.key: j for j, label in enumerate(self.labels)}

    def resolve(self, label: CategoryLabel | str | int) -> int:
        """Position of ``label`` in the label set."""
        return _resolve_label(self.labels, self.label_index, label)

    def marginal(self, b: StationaryDistribution) -> np.ndarray:
        """Label probabilities ``Pr(s)`` under the stationary distribution."""
        return b.probabilities @ self.matrix


@dataclass(frozen=True, eq=False)
class CategoryKernel:
    """Markov kernel of consecutive category labels.

    Rows of labels with zero marginal probability are undefined and raise on access.
    """

    labels: tuple[CategoryLabel, ...]
    matrix: np.ndarray
    marginal: np.ndarray

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {label.key: j for j, label in enumerate(self.labels)}

    @property
    def defined(self) -> np.ndarray:
        return self.marginal > 0.0

    def row(self, label: CategoryLabel | str | int) -> np.ndarray:
        j = _resolve_label(self.labels, self.label_index, label)
        if not self.defined[j]:
            msg = f"Label '{self.labels[j].key}' has zero probability, its transition row is undefined."
            raise UndefinedLabelError(msg)
        return self.matrix[j]

    def __getitem__(self, label: CategoryLabel | str | int) -> np.ndarray:
        return self.row(label)


def category_transition_kernel(
    kernel: TypeTargetKernel,
    revelation: RevelationKernel,
    b: StationaryDistribution,
) -> CategoryKernel:
    """Transition kernel of category labels of consecutive alerts.

    The joint ``Pr(s^k, s^{k+1})`` sums ``o(s|x) b(x) P(x, x') o(s'|x')`` over hidden
    pairs, and each row is normalised by the label marginal.
    """
    observe = revelation.matrix
    joint = observe.T @ (b.probabilities[:, None] * kernel.matrix) @ observe
    marginal = joint.sum(axis=1)
    matrix = np.full_like(joint, np.nan)
    defined = marginal > 0.0
    matrix[defined] = joint[defined] / marginal[defined, None]
    if not np.all(defined):
        LOGGER.warning(
            "Labels %s have zero probability, their transition rows are undefined.",
            [revelation.labels[j].key for j in np.flatnonzero(~defined)],
        )
    return CategoryKernel(revelation.labels, matrix, marginal)


def posterior(revelation: RevelationKernel, b: StationaryDistribution, label: CategoryLabel | str | int) -> np.ndarray:
    """Bayesian posterior ``Pr(theta, phi | s)`` over the hidden states.

    Raises
    ------
    UndefinedLabelError
        If ``label`` has zero probability under ``(o, b)``.

    """
    j = revelation.resolve(label)
    weights = revelation.matrix[:, j] * b.probabilities
    total = weights.sum()
    if total <= 0.0:
        msg = f"Label '{revelation.labels[j].key}' has zero probability, its posterior is undefined."
        raise UndefinedLabelError(msg)
    return weights / total
