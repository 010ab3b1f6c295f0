# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import enum

import numpy as np

from anemoi.idos.operator.attention import AttentionState
from anemoi.idos.operator.profile import OperatorProfile
from anemoi.idos.process.sequence import SeedLike
from anemoi.idos.process.types import AttackState
from anemoi.idos.process.types import AttackType
from anemoi.idos.process.types import CategoryLabel


class AlertResponse(str, enum.Enum):
    """Operator response to an alert."""

    DISMISS = "FE"
    ESCALATE = "RE"
    INCOMPLETE = "UN"
    NOT_INSPECTED = "NI"

    @property
    def complete(self) -> bool:
        return self in {AlertResponse.DISMISS, AlertResponse.ESCALATE}


CORRECT_RESPONSE = {AttackType.FEINT: AlertResponse.DISMISS, AttackType.REAL: AlertResponse.ESCALATE}


def draw_aitn(mean: float, noise: float, minimum: float, rng: np.random.Generator) -> float:
    """Average inspection time plus uniform noise on ``[-noise, noise]``, clamped below."""
    return max(minimum, mean + rng.uniform(-noise, noise))


def sample_aitn(
    profile: OperatorProfile,
    label: CategoryLabel,
    state: AttackState,
    seed: SeedLike = None,
) -> float:
    """Sample the inspection time an alert needs.

    Parameters
    ----------
    profile : OperatorProfile
        Operator characteristics.
    label : CategoryLabel
        Category label of the alert.
    state : AttackState
        Hidden type and target of the alert.
    seed : int, SeedSequence or Generator, optional
        Source of randomness, by default None

    Returns
    -------
    float
        Seconds, at least ``profile.aitn_min``.

    """
    rng = np.random.default_rng(seed)
    mean = profile.mean_inspection_time(label, state.type)
    return draw_aitn(mean, profile.aitn_noise, profile.aitn_min, rng)


def resolve_response(state: AttentionState, seed: SeedLike = None) -> AlertResponse:
    """Response given to the alert whose inspection is ending.

    An inspection short of its required time is incomplete. A complete one succeeds
    with the success probability and then always identifies the true type, failures
    being reported as incomplete.
    """
    if state.eit < state.aitn:
        return AlertResponse.INCOMPLETE
    rng = np.random.default_rng(seed)
    if rng.random() < state.success:
        return CORRECT_RESPONSE[state.attack_type]
    return AlertResponse.INCOMPLETE
