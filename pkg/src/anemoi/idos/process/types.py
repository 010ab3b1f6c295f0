# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import enum
from dataclasses import dataclass
from dataclasses import field
from typing import NamedTuple

LABEL_SEPARATOR = "/"


class AttackType(str, enum.Enum):
    """Hidden type of an attack."""

    FEINT = "feint"
    REAL = "real"


class AttackState(NamedTuple):
    """Hidden (type, target) pair driving the attack chain."""

    type: AttackType
    target: str

    @property
    def key(self) -> str:
        return f"{self.type.value}{LABEL_SEPARATOR}{self.target}"


@dataclass(frozen=True)
class CategoryLabel:
    """Observable triage tuple attached to an alert.

    Parameters
    ----------
    source : str
        Layer the alert originates from.
    criticality : str
        Criticality level assigned by the triage rules.
    extras : tuple[str, ...], optional
        Further sub-labels (time sensitivity, complexity, susceptibility), by default ()

    """

    source: str
    criticality: str
    extras: tuple[str, ...] = field(default=())

    @property
    def key(self) -> str:
        return LABEL_SEPARATOR.join((self.source, self.criticality, *self.extras))

    @classmethod
    def from_key(cls, key: str) -> CategoryLabel:
        parts = key.split(LABEL_SEPARATOR)
        if len(parts) < 2:
            msg = f"Category label '{key}' must read '<source>{LABEL_SEPARATOR}<criticality>[{LABEL_SEPARATOR}...]'"
            raise ValueError(msg)
        return cls(parts[0], parts[1], tuple(parts[2:]))

    def __str__(self) -> str:
        return self.key


@dataclass(frozen=True)
class AttackEvent:
    """One arrival of the attack sequence."""

    stage: int
    time: float
    type: AttackType
    target: str

    @property
    def state(self) -> AttackState:
        return AttackState(self.type, self.target)
