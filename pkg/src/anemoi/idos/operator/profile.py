# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from fnmatch import fnmatchcase

import numpy as np

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.operator.attention import BaseAttention
from anemoi.idos.operator.switching import BaseSwitching
from anemoi.idos.process.types import AttackState
from anemoi.idos.process.types import AttackType
from anemoi.idos.process.types import CategoryLabel

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuccessOverride:
    """Success probability for the (label, type, target) entries matching the patterns."""

    value: float
    label: str = "*"
    type: str = "*"
    target: str = "*"

    def matches(self, label: CategoryLabel, state: AttackState) -> bool:
        return (
            fnmatchcase(label.key, self.label)
            and fnmatchcase(state.type.value, self.type)
            and fnmatchcase(state.target, self.target)
        )


@dataclass(frozen=True, eq=False)
class ProfileTables:
    """Profile values laid out per label and hidden state for the event loop."""

    mean_inspection: np.ndarray
    success: np.ndarray
    max_delay: np.ndarray
    thresholds: np.ndarray


@dataclass(frozen=True, eq=False)
class OperatorProfile:
    """Attention characteristics of a tier-1 operator.

    Parameters
    ----------
    expertise : str
        Expertise level, an opaque identifier.
    mean_inspection : Mapping[str, Mapping[str, float]]
        Average inspection time in seconds, ``mean_inspection[criticality][type]``.
    attention : BaseAttention
        Efficiency as a function of distractions.
    switching : BaseSwitching
        Switching model.
    aitn_noise : float
        Half-width of the uniform noise added to the average inspection time.
    aitn_min : float
        Lower clamp of the sampled inspection time.
    success : float
        Default probability of a correct response after a complete inspection.
    success_overrides : tuple[SuccessOverride, ...]
        Pattern overrides of ``success``, later entries take precedence.
    max_delay : float
        Default maximum allowable delay in seconds.
    max_delay_overrides : Mapping[str, float]
        Per-label-pattern overrides of ``max_delay``.

    """

    expertise: str
    mean_inspection: Mapping[str, Mapping[str, float]]
    attention: BaseAttention
    switching: BaseSwitching
    aitn_noise: float = 5.0
    aitn_min: float = 0.1
    success: float = 0.9
    success_overrides: tuple[SuccessOverride, ...] = ()
    max_delay: float = 60.0
    max_delay_overrides: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for criticality, row in self.mean_inspection.items():
            for attack_type, value in row.items():
                if attack_type not in {t.value for t in AttackType}:
                    msg = f"Unknown attack type '{attack_type}'"
                    raise ConfigurationError(msg, location=f"operator.mean_inspection.{criticality}")
                if not float(value) > 0.0:
                    msg = f"Average inspection time must be strictly positive, got {value}"
                    raise ConfigurationError(msg, location=f"operator.mean_inspection.{criticality}.{attack_type}")
        if self.aitn_noise < 0.0:
            msg = f"Inspection time noise must be non-negative, got {self.aitn_noise}"
            raise ConfigurationError(msg, location="operator.aitn_noise")
        if not self.aitn_min > 0.0:
            msg = f"Inspection time clamp must be strictly positive, got {self.aitn_min}"
            raise ConfigurationError(msg, location="operator.aitn_min")
        for value in (self.success, *(o.value for o in self.success_overrides)):
            if not 0.0 <= value <= 1.0:
                msg = f"Success probabilities must lie in [0, 1], got {value}"
                raise ConfigurationError(msg, location="operator.success")
        for value in (self.max_delay, *self.max_delay_overrides.values()):
            if not value > 0.0:
                msg = f"Maximum allowable delays must be strictly positive, got {value}"
                raise ConfigurationError(msg, location="operator.max_delay")

    def mean_inspection_time(self, label: CategoryLabel, attack_type: AttackType) -> float:
        try:
            return float(self.mean_inspection[label.criticality][attack_type.value])
        except KeyError:
            msg = f"No average inspection time for criticality '{label.criticality}' and type '{attack_type.value}'"
            raise ConfigurationError(msg, location="operator.mean_inspection") from None

    def success_probability(self, label: CategoryLabel, state: AttackState) -> float:
        value = self.success
        for override in self.success_overrides:
            if override.matches(label, state):
                value = override.value
        return float(value)

    def capacity_gap(self, label: CategoryLabel, state: AttackState) -> float:
        return 1.0 - self.success_probability(label, state)

    def max_delay_for(self, label: CategoryLabel) -> float:
        value = self.max_delay
        for pattern, override in self.max_delay_overrides.items():
            if fnmatchcase(label.key, pattern):
                value = override
        return float(value)

    def tabulate(self, labels: Sequence[CategoryLabel], states: Sequence[AttackState]) -> ProfileTables:
        """Lay out the profile per (label, hidden state)."""
        mean_inspection = np.array([[self.mean_inspection_time(s, x.type) for x in states] for s in labels])
        success = np.array([[self.success_probability(s, x) for x in states] for s in labels])
        max_delay = np.array([self.max_delay_for(s) for s in labels])
        thresholds = np.array(self.attention.thresholds_for(s.key for s in labels))
        return ProfileTables(mean_inspection, success, max_delay, thresholds)
