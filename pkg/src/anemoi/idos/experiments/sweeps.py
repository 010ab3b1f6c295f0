# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Experiments sweeping one scenario parameter and comparing attention-management policies."""

from __future__ import annotations

import logging
import math
from collections.abc import Mapping
from collections.abc import Sequence
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from omegaconf import DictConfig
from omegaconf import OmegaConf
from tqdm import tqdm

from anemoi.idos.diagnostics.tracking import MlflowTracker
from anemoi.idos.errors import ConfigurationError
from anemoi.idos.experiments.budget import BudgetModel
from anemoi.idos.experiments.budget import expected_attack_cost
from anemoi.idos.experiments.budget import solve_rate
from anemoi.idos.experiments.reporting import artifact_metadata
from anemoi.idos.experiments.reporting import write_csv
from anemoi.idos.experiments.reporting import write_effective_config
from anemoi.idos.experiments.runner import comparison_policies
from anemoi.idos.experiments.runner import evaluate
from anemoi.idos.experiments.runner import learn
from anemoi.idos.management.policy import regret_report
from anemoi.idos.management.qtable import QTable
from anemoi.idos.simulation.estimators import risk_report
from anemoi.idos.simulation.scenario import load_scenario
from anemoi.idos.utils.parallel import map_ordered

LOGGER = logging.getLogger(__name__)

EXPERIMENTS = ("convergence", "cost_sweep", "freq_sweep", "feint_sweep", "attention_sweep")

VARIABLES = {
    "replicate": (),
    "incomplete_cost": ("costs.incomplete", "costs.not_inspected"),
    "rho": ("process.arrivals.scale",),
    "eta_fe": ("process.kernel.eta_fe",),
    "n_bar0": ("operator.attention.threshold",),
}

POLICY_TAGS = ("optimal", "default")


def _check_range(variable: str, values: Sequence[float]) -> None:
    checks = {
        "replicate": lambda v: v >= 0 and float(v).is_integer(),
        "incomplete_cost": lambda v: v >= 0.0,
        "rho": lambda v: v > 0.0,
        "eta_fe": lambda v: 0.0 <= v <= 1.0,
        "n_bar0": lambda v: v >= 0.0,
    }
    bad = [v for v in values if not checks[variable](v)]
    if bad:
        msg = f"Values {bad} are out of range for '{variable}'"
        raise ConfigurationError(msg, location="sweep.values")


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: the swept variable, its grid and the policies compared.

    Parameters
    ----------
    name : str
        Experiment name, also the artifact stem.
    variable : str
        ``replicate``, ``incomplete_cost``, ``rho``, ``eta_fe`` or ``n_bar0``.
    values : tuple[float, ...]
        Grid, non-empty.
    policies : tuple[str, ...]
        Policy tags among ``optimal`` and ``default``.
    fixed : tuple[int, ...]
        Fixed de-emphasis counts evaluated as ``fixed_m`` policies.
    exploration_episodes : int, optional
        Per point, ``am.exploration_episodes`` when not given.
    evaluation_episodes : int, optional
        Per point, ``am.evaluation_episodes`` when not given.
    warm_start : bool
        Start every point's learning from a table learned on the base scenario.
    estimator : str
        Risk estimator mode, ``first`` or ``every``.
    budget : dict
        Attacker budget entries, see ``BudgetModel.from_config``.

    """

    name: str
    variable: str
    values: tuple[float, ...]
    policies: tuple[str, ...] = POLICY_TAGS
    fixed: tuple[int, ...] = ()
    exploration_episodes: int | None = None
    evaluation_episodes: int | None = None
    warm_start: bool = False
    estimator: str = "every"
    budget: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in EXPERIMENTS:
            msg = f"Unknown experiment '{self.name}', expected one of {EXPERIMENTS}"
            raise ConfigurationError(msg, location="sweep.name")
        if self.variable not in VARIABLES:
            msg = f"Unknown sweep variable '{self.variable}', expected one of {list(VARIABLES)}"
            raise ConfigurationError(msg, location="sweep.variable")
        if not self.values:
            msg = "The sweep grid is empty."
            raise ConfigurationError(msg, location="sweep.values")
        _check_range(self.variable, self.values)
        unknown = [p for p in self.policies if p not in POLICY_TAGS]
        if unknown:
            msg = f"Unknown policies {unknown}, expected tags among {POLICY_TAGS}"
            raise ConfigurationError(msg, location="sweep.policies")

    @classmethod
    def from_config(cls, sweep: Mapping[str, Any]) -> SweepSpec:
        values = sweep.get("values")
        if isinstance(values, Mapping):
            # start/stop/step grids, stop included
            start, stop, step = float(values["start"]), float(values["stop"]), float(values["step"])
            values = np.round(np.arange(start, stop + step / 2, step), 10).tolist()
        return cls(
            name=str(sweep.get("name")),
            variable=str(sweep.get("variable")),
            values=tuple(float(v) for v in values or ()),
            policies=tuple(sweep.get("policies") or POLICY_TAGS),
            fixed=tuple(int(m) for m in sweep.get("fixed") or ()),
            exploration_episodes=sweep.get("exploration_episodes"),
            evaluation_episodes=sweep.get("evaluation_episodes"),
            warm_start=bool(sweep.get("warm_start", False)),
            estimator=str(sweep.get("estimator", "every")),
            budget=dict(sweep.get("budget") or {}),
        )

    @property
    def budget_model(self) -> BudgetModel | None:
        return BudgetModel.from_config(self.budget) if self.budget else None


@dataclass(frozen=True, eq=False)
class ExperimentResult:
    """Aggregated rows of an experiment, ready to be written."""

    name: str
    table: pd.DataFrame
    metadata: dict[str, Any]
    extras: dict[str, pd.DataFrame] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class PointResult:
    rows: list[dict[str, Any]]
    history: pd.DataFrame | None = None
    regret: pd.DataFrame | None = None


def point_config(config: DictConfig, spec: SweepSpec, value: float) -> DictConfig:
    """Base configuration with the swept variable set to ``value``."""
    point = OmegaConf.create(OmegaConf.to_container(config, resolve=True))
    for key in VARIABLES[spec.variable]:
        OmegaConf.update(point, key, value, merge=False)
    if spec.variable == "eta_fe":
        if OmegaConf.select(point, "process.kernel.mode", default="independent") != "independent":
            msg = "The feint sweep needs an independent attack kernel."
            raise ConfigurationError(msg, location="process.kernel.mode")
        budget = spec.budget_model or BudgetModel.from_config({})
        OmegaConf.update(point, "process.arrivals.mode", "poisson", merge=False)
        OmegaConf.update(point, "process.arrivals.rate", solve_rate(budget, value), merge=False)
        OmegaConf.update(point, "process.arrivals.scale", 1.0, merge=False)
    return point


def _run_point(
    config: DictConfig,
    spec: SweepSpec,
    index: int,
    value: float,
    warm: QTable | None,
    progress: bool,
) -> PointResult:
    scenario = load_scenario(point_config(config, spec, value))
    labels = scenario.label_keys

    learned = None
    if "optimal" in spec.policies:
        learned = learn(scenario, warm, spec.exploration_episodes, point=index, progress=progress)
    policies = comparison_policies(
        labels,
        learned=learned.policy if learned is not None else None,
        default="default" in spec.policies,
        fixed=spec.fixed,
    )
    qtable = learned.qtable if learned is not None else None
    logs = evaluate(scenario, policies, spec.evaluation_episodes, point=index, qtable=qtable)

    truncation = float(OmegaConf.select(scenario.config, "sim.truncation", default=1e-3))
    risks = risk_report(logs, scenario.am.gamma, labels, mode=spec.estimator, truncation=truncation)
    attack_cost = np.nan
    if spec.variable in ("rho", "eta_fe"):
        attack_cost = expected_attack_cost(spec.budget_model or BudgetModel.from_config({}), scenario.process)

    rows = []
    for i, label in enumerate(labels):
        row: dict[str, Any] = {spec.variable: value, "label": label}
        for policy in policies:
            entry = risks[(risks["policy"] == policy.name) & (risks["label"] == label)].iloc[0]
            row[f"risk_{policy.name}"] = entry["risk"]
            row[f"se_{policy.name}"] = entry["se"]
        if learned is not None:
            row["action"] = learned.policy.actions[i]
            row["converged"] = learned.converged
            row["warm_start"] = learned.warm_start
            if "default" in spec.policies:
                row["margin"] = row["risk_default"] - row["risk_optimal"]
                row["margin_se"] = math.hypot(row["se_default"], row["se_optimal"])
        if spec.variable in ("rho", "eta_fe"):
            row["attack_cost"] = attack_cost
        rows.append(row)

    history = regret = None
    if learned is not None:
        history = learned.history.assign(**{spec.variable: value})
        regret = regret_report(learned.qtable).assign(**{spec.variable: value})
    LOGGER.info("Sweep %s point %s=%s done", spec.name, spec.variable, value)
    return PointResult(rows, history, regret)


def run_experiment(
    name: str,
    config: DictConfig,
    sweep: SweepSpec | None = None,
    num_workers: int = 1,
    tracker: MlflowTracker | None = None,
) -> ExperimentResult:
    """Run one experiment over its grid.

    Parameters
    ----------
    name : str
        One of ``EXPERIMENTS``.
    config : DictConfig
        Composed base configuration, its ``sweep`` section describes the grid unless
        ``sweep`` is given.
    sweep : SweepSpec, optional
        Explicit sweep description.
    num_workers : int, optional
        Worker processes running points in parallel, by default 1
    tracker : MlflowTracker, optional
        Receives per-point metrics.

    Returns
    -------
    ExperimentResult
        One row per (point, label), plus the learning history and regret tables.

    """
    if sweep is None:
        sweep = SweepSpec.from_config(OmegaConf.to_container(config.sweep, resolve=True))
    if sweep.name != name:
        msg = f"Experiment '{name}' was asked for but the sweep configuration describes '{sweep.name}'"
        raise ConfigurationError(msg, location="sweep.name")

    base = load_scenario(config)
    warm = None
    if sweep.warm_start and "optimal" in sweep.policies:
        LOGGER.info("Learning the warm-start table on the base scenario")
        warm = learn(base, point=len(sweep.values)).qtable

    progress = num_workers <= 1 and bool(OmegaConf.select(config, "diagnostics.enable_progress_bar", default=False))
    tasks = [(config, sweep, index, value, warm, False) for index, value in enumerate(sweep.values)]
    if num_workers <= 1:
        points = [_run_point(*task[:-1], progress) for task in tqdm(tasks, desc=name, disable=not progress)]
    else:
        points = map_ordered(_run_point, tasks, num_workers)

    table = pd.DataFrame([row for point in points for row in point.rows])
    extras = {}
    histories = [p.history for p in points if p.history is not None]
    if histories:
        extras["history"] = pd.concat(histories, ignore_index=True)
        extras["regret"] = pd.concat([p.regret for p in points], ignore_index=True)

    if tracker is not None:
        for index, value in enumerate(sweep.values):
            metrics = {}
            for _, row in table[table[sweep.variable] == value].iterrows():
                for column in table.columns:
                    if column.startswith(("risk_", "margin")) and pd.notna(row[column]):
                        metrics[f"{row['label']}.{column}"] = row[column]
            tracker.log_metrics(metrics, step=index)

    metadata = artifact_metadata(
        base.digest,
        base.seed,
        experiment=name,
        variable=sweep.variable,
        values=list(sweep.values),
        gamma=base.am.gamma,
        exploration_episodes=sweep.exploration_episodes or base.am.exploration_episodes,
        evaluation_episodes=sweep.evaluation_episodes or base.am.evaluation_episodes,
        estimator=sweep.estimator,
        warm_start=sweep.warm_start,
    )
    return ExperimentResult(name, table, metadata, extras)


def save_experiment(result: ExperimentResult, directory: Path | str, config: DictConfig | None = None) -> list[Path]:
    """Write the main table and every extra table as CSV artifacts."""
    directory = Path(directory)
    paths = [write_csv(result.table, directory / f"{result.name}.csv", result.metadata)]
    for key, table in result.extras.items():
        paths.append(write_csv(table, directory / f"{result.name}-{key}.csv", result.metadata))
    if config is not None:
        paths.append(write_effective_config(config, directory))
    return paths
