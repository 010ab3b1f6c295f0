# (C) Copyright 2024 European Centre for Medium-Range Weather Forecasts.
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

from typing import Any


class IdosError(Exception):
    """Base class for all errors raised by anemoi-idos."""


class ConfigurationError(IdosError, ValueError):
    """Invalid scenario configuration.

    Parameters
    ----------
    message : str
        Human readable description of the problem.
    location : str, optional
        Dotted ``section.key`` path of the offending entry.

    """

    def __init__(self, message: str, location: str | None = None) -> None:
        self.location = location
        self.message = message
        super().__init__(f"[{location}] {message}" if location else message)


class UndefinedLabelError(IdosError, KeyError):
    """A category label with zero probability under the triage model was accessed."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "undefined label"


class InsufficientDataError(IdosError):
    """An estimator was asked for a label/action pair it has no samples for."""


class ConsistencyError(IdosError, AssertionError):
    """A closed-form result broke a monotonicity property it must satisfy."""


class ValidationFailure(IdosError):
    """Monte-Carlo estimates left their tolerance band around the closed forms.

    Parameters
    ----------
    message : str
        Summary of the failure.
    failures : list[dict], optional
        Offending report rows.

    """

    def __init__(self, message: str, failures: list[dict[str, Any]] | None = None) -> None:
        self.failures = failures or []
        super().__init__(message)
