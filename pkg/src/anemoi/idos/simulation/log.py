# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Episode logs and their line-delimited JSON form.

The file starts with a header record, followed by one ``stage`` record per attack
stage and one ``inspection`` record per inspection. Field order is fixed by
``STAGE_FIELDS`` and ``INSPECTION_FIELDS`` and versioned by ``LOG_VERSION``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any

import numpy as np

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.operator.response import AlertResponse

LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "anemoi-idos-episode"
LOG_VERSION = 1

STAGE_FIELDS = ("k", "t", "type", "target", "label", "emphasized", "response")
INSPECTION_FIELDS = (
    "h",
    "stage",
    "label",
    "action",
    "response",
    "coc",
    "start",
    "end",
    "aitn",
    "eit",
    "q_value",
    "truncated",
)

RESPONSES = tuple(AlertResponse)


@dataclass(frozen=True, eq=False)
class StageRecords:
    """Per attack stage columns, response codes index ``AlertResponse``."""

    times: np.ndarray
    hidden: np.ndarray
    labels: np.ndarray
    emphasized: np.ndarray
    responses: np.ndarray

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True, eq=False)
class InspectionRecords:
    """Per inspection columns, the last one being truncated by the horizon."""

    stages: np.ndarray
    labels: np.ndarray
    actions: np.ndarray
    responses: np.ndarray
    costs: np.ndarray
    starts: np.ndarray
    ends: np.ndarray
    aitn: np.ndarray
    eit: np.ndarray
    q_values: np.ndarray
    truncated: np.ndarray

    def __len__(self) -> int:
        return int(self.stages.size)

    @property
    def complete(self) -> np.ndarray:
        """Mask of inspections closed by a hand-off."""
        return ~self.truncated


@dataclass(frozen=True, eq=False)
class EpisodeLog:
    """Everything that happened in one episode.

    Parameters
    ----------
    stages : StageRecords
        One row per attack stage.
    inspections : InspectionRecords
        One row per inspection.
    label_keys : tuple[str, ...]
        Category label keys, indexed by the label columns.
    state_keys : tuple[str, ...]
        Hidden state keys, indexed by the hidden column.
    policy : str
        ``learn`` or the tag of the evaluated policy.
    seed : dict[str, Any]
        Entropy and spawn key of the episode stream.
    digest : str
        Digest of the scenario configuration.

    """

    stages: StageRecords
    inspections: InspectionRecords
    label_keys: tuple[str, ...]
    state_keys: tuple[str, ...]
    policy: str
    seed: dict[str, Any] = field(default_factory=dict)
    digest: str = ""

    def header(self) -> dict[str, Any]:
        return {
            "format": LOG_FORMAT,
            "version": LOG_VERSION,
            "policy": self.policy,
            "seed": self.seed,
            "digest": self.digest,
            "labels": list(self.label_keys),
            "states": list(self.state_keys),
            "stage_fields": list(STAGE_FIELDS),
            "inspection_fields": list(INSPECTION_FIELDS),
        }

    def records(self) -> list[dict[str, Any]]:
        """Stage then inspection records, in field order."""
        s = self.stages
        out = []
        for k in range(len(s)):
            attack_type, target = self.state_keys[s.hidden[k]].split("/", 1)
            values = (
                k,
                float(s.times[k]),
                attack_type,
                target,
                self.label_keys[s.labels[k]],
                bool(s.emphasized[k]),
                RESPONSES[s.responses[k]].value,
            )
            out.append({"record": "stage", **dict(zip(STAGE_FIELDS, values))})
        i = self.inspections
        for h in range(len(i)):
            q_value = float(i.q_values[h])
            values = (
                h,
                int(i.stages[h]),
                self.label_keys[i.labels[h]],
                int(i.actions[h]),
                RESPONSES[i.responses[h]].value,
                float(i.costs[h]),
                float(i.starts[h]),
                float(i.ends[h]),
                float(i.aitn[h]),
                float(i.eit[h]),
                None if np.isnan(q_value) else q_value,
                bool(i.truncated[h]),
            )
            out.append({"record": "inspection", **dict(zip(INSPECTION_FIELDS, values))})
        return out


def write_episode_log(log: EpisodeLog, path: Path | str) -> Path:
    """Write ``log`` as line-delimited JSON."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as f:
        f.write(json.dumps(log.header()) + "\n")
        for record in log.records():
            f.write(json.dumps(record) + "\n")
    LOGGER.info("Episode log written to %s", path)
    return path


def read_episode_log(path: Path | str) -> EpisodeLog:
    """Read a log written by ``write_episode_log``."""
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0])
    if header.get("format") != LOG_FORMAT or header.get("version") != LOG_VERSION:
        msg = f"{path} is not a version {LOG_VERSION} episode log."
        raise ConfigurationError(msg, location="log")
    labels = {key: j for j, key in enumerate(header["labels"])}
    states = {key: j for j, key in enumerate(header["states"])}
    codes = {response.value: j for j, response in enumerate(RESPONSES)}

    stage_rows = []
    inspection_rows = []
    for line in lines[1:]:
        record = json.loads(line)
        (stage_rows if record.pop("record") == "stage" else inspection_rows).append(record)

    stages = StageRecords(
        times=np.array([r["t"] for r in stage_rows], dtype=float),
        hidden=np.array([states[f"{r['type']}/{r['target']}"] for r in stage_rows], dtype=np.int64),
        labels=np.array([labels[r["label"]] for r in stage_rows], dtype=np.int64),
        emphasized=np.array([r["emphasized"] for r in stage_rows], dtype=bool),
        responses=np.array([codes[r["response"]] for r in stage_rows], dtype=np.int8),
    )
    inspections = InspectionRecords(
        stages=np.array([r["stage"] for r in inspection_rows], dtype=np.int64),
        labels=np.array([labels[r["label"]] for r in inspection_rows], dtype=np.int64),
        actions=np.array([r["action"] for r in inspection_rows], dtype=np.int64),
        responses=np.array([codes[r["response"]] for r in inspection_rows], dtype=np.int8),
        costs=np.array([r["coc"] for r in inspection_rows], dtype=float),
        starts=np.array([r["start"] for r in inspection_rows], dtype=float),
        ends=np.array([r["end"] for r in inspection_rows], dtype=float),
        aitn=np.array([r["aitn"] for r in inspection_rows], dtype=float),
        eit=np.array([r["eit"] for r in inspection_rows], dtype=float),
        q_values=np.array([np.nan if r["q_value"] is None else r["q_value"] for r in inspection_rows], dtype=float),
        truncated=np.array([r["truncated"] for r in inspection_rows], dtype=bool),
    )
    return EpisodeLog(
        stages,
        inspections,
        tuple(header["labels"]),
        tuple(header["states"]),
        header["policy"],
        header.get("seed", {}),
        header.get("digest", ""),
    )
