# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import logging
from abc import ABC
from abc import abstractmethod
from collections.abc import Iterable
from collections.abc import Mapping
from dataclasses import dataclass
from fnmatch import fnmatchcase

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.process.types import AttackType

LOGGER = logging.getLogger(__name__)


class BaseAttention(ABC):
    """Configurable level of operational efficiency as a function of distractions.

    The stress level is the number of emphasized alerts that arrived during the
    current inspection, so the whole shape lives in the efficiency curve.
    """

    def __init__(
        self,
        threshold: float = 0.0,
        slope: float = 0.25,
        floor: float = 0.0,
        thresholds: Mapping[str, float] | None = None,
    ) -> None:
        """Initialise the attention function.

        Parameters
        ----------
        threshold : float
            Attention threshold, number of distractions handled at full efficiency.
        slope : float
            Efficiency lost per distraction beyond the threshold.
        floor : float
            Lowest efficiency reached under overload.
        thresholds : Mapping[str, float], optional
            Per-label threshold overrides, keyed by label patterns (``"*/high"``).
            Later entries take precedence.

        """
        if threshold < 0:
            msg = f"Attention threshold must be non-negative, got {threshold}"
            raise ConfigurationError(msg, location="operator.attention.threshold")
        if slope < 0:
            msg = f"Efficiency slope must be non-negative, got {slope}"
            raise ConfigurationError(msg, location="operator.attention.slope")
        if not 0.0 <= floor <= 1.0:
            msg = f"Efficiency floor must lie in [0, 1], got {floor}"
            raise ConfigurationError(msg, location="operator.attention.floor")
        self.threshold = float(threshold)
        self.slope = float(slope)
        self.floor = float(floor)
        self.thresholds = {str(k): float(v) for k, v in (thresholds or {}).items()}
        if any(v < 0 for v in self.thresholds.values()):
            msg = "Per-label attention thresholds must be non-negative."
            raise ConfigurationError(msg, location="operator.attention.thresholds")

    def threshold_for(self, label: str | None = None) -> float:
        """Attention threshold applying to the label ``label``."""
        value = self.threshold
        if label is None:
            return value
        for pattern, override in self.thresholds.items():
            if fnmatchcase(label, pattern):
                value = override
        return value

    def thresholds_for(self, labels: Iterable[str]) -> list[float]:
        return [self.threshold_for(label) for label in labels]

    def with_threshold(self, threshold: float) -> BaseAttention:
        """Copy of this function with another constant threshold."""
        return type(self)(**{**self._parameters(), "threshold": threshold})

    def _parameters(self) -> dict:
        return {"threshold": self.threshold, "slope": self.slope, "floor": self.floor, "thresholds": self.thresholds}

    def _decay(self, n: float, threshold: float) -> float:
        return max(self.floor, 1.0 - self.slope * (n - threshold))

    @abstractmethod
    def efficiency(self, n: int, threshold: float) -> float: ...

    def __call__(self, n: int, label: str | None = None) -> float:
        return self.efficiency(n, self.threshold_for(label))

    def __repr__(self) -> str:
        return f"{type(self).__name__}(threshold={self.threshold}, slope={self.slope}, floor={self.floor})"


class TrapezoidAttention(BaseAttention):
    """Full efficiency up to the threshold, then a linear decay down to the floor."""

    def efficiency(self, n: int, threshold: float) -> float:
        if n <= threshold:
            return 1.0
        return self._decay(n, threshold)


class InverseUAttention(BaseAttention):
    """Efficiency rising from ``base`` to 1 at the threshold, then decaying.

    Mild stress sharpens attention until the threshold, beyond which the operator
    is overloaded exactly as in the trapezoid shape.
    """

    def __init__(
        self,
        threshold: float = 0.0,
        slope: float = 0.25,
        floor: float = 0.0,
        thresholds: Mapping[str, float] | None = None,
        base: float = 0.8,
    ) -> None:
        super().__init__(threshold=threshold, slope=slope, floor=floor, thresholds=thresholds)
        if not 0.0 <= base <= 1.0:
            msg = f"Base efficiency must lie in [0, 1], got {base}"
            raise ConfigurationError(msg, location="operator.attention.base")
        self.base = float(base)

    def _parameters(self) -> dict:
        return {**super()._parameters(), "base": self.base}

    def efficiency(self, n: int, threshold: float) -> float:
        if n <= threshold:
            if threshold == 0:
                return 1.0
            return self.base + (1.0 - self.base) * n / threshold
        return self._decay(n, threshold)


def loe(n: int, attention: BaseAttention, label: str | None = None) -> float:
    """Level of operational efficiency after ``n`` distractions."""
    return attention(n, label)


@dataclass
class AttentionState:
    """Mutable attention bookkeeping of the inspection in progress.

    Attributes
    ----------
    start_time : float
        Arrival time of the inspected alert.
    stage : int
        Attack stage of the inspected alert.
    label : int
        Index of the inspected alert's category label.
    hidden : int
        Index of the inspected alert's hidden (type, target).
    attack_type : AttackType
        Hidden type of the inspected alert.
    success : float
        Probability that a complete inspection yields a correct response.
    aitn : float
        Inspection time the alert needs.
    eit : float
        Effective inspection time accumulated so far.
    distractions : int
        Emphasized arrivals since the inspection started.
    efficiency : float
        Current level of operational efficiency.
    clock : float
        Time up to which ``eit`` is accumulated.

    """

    start_time: float
    stage: int
    label: int
    hidden: int
    aitn: float
    attack_type: AttackType = AttackType.FEINT
    success: float = 1.0
    eit: float = 0.0
    distractions: int = 0
    efficiency: float = 1.0
    clock: float = 0.0

    def __post_init__(self) -> None:
        self.clock = max(self.clock, self.start_time)

    @property
    def finished(self) -> bool:
        return self.eit >= self.aitn

    def advance(self, time: float) -> None:
        """Accumulate effective inspection time at the current efficiency up to ``time``."""
        if time > self.clock:
            self.eit += self.efficiency * (time - self.clock)
            self.clock = time


def accumulate_eit(state: AttentionState, segments: Iterable[tuple[float, float]]) -> float:
    """Add piecewise-constant efficiency segments to the effective inspection time.

    Parameters
    ----------
    state : AttentionState
        Inspection in progress, updated in place.
    segments : Iterable[tuple[float, float]]
        ``(efficiency, duration)`` pairs covering ``[t1, t2]`` in order.

    Returns
    -------
    float
        Updated effective inspection time.

    """
    for efficiency, duration in segments:
        if duration < 0:
            msg = f"Segment durations must be non-negative, got {duration}"
            raise ValueError(msg)
        state.eit += efficiency * duration
        state.clock += duration
    return state.eit
