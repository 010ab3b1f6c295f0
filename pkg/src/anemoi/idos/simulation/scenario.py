# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Validated scenario built from a hydra configuration."""

from __future__ import annotations

import logging
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from hydra.errors import InstantiationException
from hydra.utils import instantiate
from omegaconf import DictConfig
from omegaconf import OmegaConf
from omegaconf.errors import OmegaConfBaseException

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.management.costs import StageCostTable
from anemoi.idos.management.qtable import CountMode
from anemoi.idos.operator.attention import BaseAttention
from anemoi.idos.operator.profile import OperatorProfile
from anemoi.idos.operator.profile import ProfileTables
from anemoi.idos.operator.profile import SuccessOverride
from anemoi.idos.operator.switching import BaseSwitching
from anemoi.idos.process.arrivals import ArrivalMode
from anemoi.idos.process.arrivals import InterArrivalModel
from anemoi.idos.process.kernels import CategoryKernel
from anemoi.idos.process.kernels import RevelationKernel
from anemoi.idos.process.kernels import StationaryDistribution
from anemoi.idos.process.kernels import TypeTargetKernel
from anemoi.idos.process.kernels import attack_states
from anemoi.idos.process.kernels import category_transition_kernel
from anemoi.idos.process.kernels import stationary_distribution
from anemoi.idos.process.types import AttackState
from anemoi.idos.process.types import AttackType
from anemoi.idos.process.types import CategoryLabel
from anemoi.idos.utils.jsonify import config_digest
from anemoi.idos.utils.seeding import get_base_seed

LOGGER = logging.getLogger(__name__)

REQUIRED_SECTIONS = ("process", "triage", "operator", "costs", "am", "sim")


@dataclass(frozen=True, eq=False)
class ProcessModel:
    """Attack process and triage side of a scenario."""

    kernel: TypeTargetKernel
    arrivals: InterArrivalModel
    initial: AttackState
    revelation: RevelationKernel

    @cached_property
    def stationary(self) -> StationaryDistribution:
        return stationary_distribution(self.kernel)

    @cached_property
    def category_kernel(self) -> CategoryKernel:
        return category_transition_kernel(self.kernel, self.revelation, self.stationary)

    @property
    def states(self) -> tuple[AttackState, ...]:
        return self.kernel.states

    @property
    def labels(self) -> tuple[CategoryLabel, ...]:
        return self.revelation.labels

    @cached_property
    def label_marginal(self) -> np.ndarray:
        return self.revelation.marginal(self.stationary)


@dataclass(frozen=True)
class AmSettings:
    """Attention-management learning parameters."""

    max_deemphasis: int = 3
    gamma: float = 0.95
    kc: float = 10.0
    epsilon: float = 1.0
    count_mode: CountMode = CountMode.LABEL
    exploration_episodes: int = 20
    evaluation_episodes: int = 20
    convergence_window: int = 3
    resume: str | None = None

    def __post_init__(self) -> None:
        checks = (
            (self.max_deemphasis >= 0, "max_deemphasis", "must be non-negative"),
            (0.0 <= self.gamma < 1.0, "gamma", "must lie in [0, 1)"),
            (self.kc > 0.0, "kc", "must be strictly positive"),
            (0.0 <= self.epsilon <= 1.0, "epsilon", "must lie in [0, 1]"),
            (self.exploration_episodes >= 0, "exploration_episodes", "must be non-negative"),
            (self.evaluation_episodes >= 1, "evaluation_episodes", "must be at least 1"),
            (self.convergence_window >= 1, "convergence_window", "must be at least 1"),
        )
        for ok, key, message in checks:
            if not ok:
                msg = f"{key}={getattr(self, key)} {message}"
                raise ConfigurationError(msg, location=f"am.{key}")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything an episode needs, validated.

    Parameters
    ----------
    process : ProcessModel
        Attack process and triage.
    operator : OperatorProfile
        Operator characteristics.
    costs : StageCostTable
        Stage costs.
    am : AmSettings
        Learning parameters.
    horizon : int
        Largest number of alerts per episode.
    shift_length : float
        Episode length in seconds.
    seed : int
        Base seed.
    config : DictConfig
        Effective configuration the scenario was built from.

    """

    process: ProcessModel
    operator: OperatorProfile
    costs: StageCostTable
    am: AmSettings
    horizon: int
    shift_length: float
    seed: int
    config: DictConfig

    def __post_init__(self) -> None:
        if self.horizon < 1:
            msg = f"The horizon must hold at least one alert, got {self.horizon}"
            raise ConfigurationError(msg, location="sim.horizon")
        if not self.shift_length > 0.0:
            msg = f"Shift length must be strictly positive, got {self.shift_length}"
            raise ConfigurationError(msg, location="sim.shift_length")

    @property
    def labels(self) -> tuple[CategoryLabel, ...]:
        return self.process.labels

    @property
    def label_keys(self) -> list[str]:
        return [label.key for label in self.labels]

    @cached_property
    def tables(self) -> ProfileTables:
        return self.operator.tabulate(self.labels, self.process.states)

    @cached_property
    def digest(self) -> str:
        return config_digest(self.config)


def _section(config: DictConfig, key: str) -> dict[str, Any]:
    return OmegaConf.to_container(config[key], resolve=True)


def _build_process(process: Mapping[str, Any], triage: Mapping[str, Any]) -> ProcessModel:
    targets = [str(t) for t in process.get("targets") or []]
    states = attack_states(targets)

    kernel_cfg = process.get("kernel") or {}
    mode = kernel_cfg.get("mode", "independent")
    if mode == "independent":
        eta_fe = float(kernel_cfg.get("eta_fe", 0.5))
        kernel = TypeTargetKernel.independent(targets, eta_fe, kernel_cfg.get("target_weights"))
    elif mode == "table":
        kernel = TypeTargetKernel.from_table(targets, kernel_cfg.get("table") or {})
    else:
        msg = f"Unknown kernel mode '{mode}', expected 'independent' or 'table'"
        raise ConfigurationError(msg, location="process.kernel.mode")

    arrivals_cfg = process.get("arrivals") or {}
    try:
        arrival_mode = ArrivalMode(arrivals_cfg.get("mode", ArrivalMode.TYPE_PAIR.value))
    except ValueError:
        msg = f"Unknown arrival mode '{arrivals_cfg.get('mode')}'"
        raise ConfigurationError(msg, location="process.arrivals.mode") from None
    shape = float(arrivals_cfg.get("shape", 1.0))
    if arrival_mode is ArrivalMode.POISSON:
        if shape != 1.0:
            msg = "Poisson mode draws exponential inter-arrival times, the shape must be 1."
            raise ConfigurationError(msg, location="process.arrivals.shape")
        arrivals = InterArrivalModel.poisson(states, arrivals_cfg.get("rate"))
    elif arrival_mode is ArrivalMode.TYPE_PAIR:
        arrivals = InterArrivalModel.type_pair(states, arrivals_cfg.get("means") or {}, shape)
    else:
        arrivals = InterArrivalModel.from_table(states, arrivals_cfg.get("table") or {}, shape)
    scale = float(arrivals_cfg.get("scale", 1.0))
    if scale != 1.0:
        arrivals = arrivals.scaled(scale)

    initial_cfg = process.get("initial") or {}
    try:
        initial = AttackState(AttackType(initial_cfg.get("type", "feint")), str(initial_cfg.get("target", targets[0])))
    except ValueError:
        msg = f"Unknown attack type '{initial_cfg.get('type')}'"
        raise ConfigurationError(msg, location="process.initial.type") from None
    kernel.index(initial)

    revelation_cfg = triage.get("revelation") or {}
    revelation_mode = revelation_cfg.get("mode", "separable")
    if revelation_mode == "separable":
        revelation = RevelationKernel.separable(
            targets,
            [str(c) for c in triage.get("criticalities") or []],
            revelation_cfg.get("criticality") or {},
        )
    elif revelation_mode == "table":
        labels = [CategoryLabel.from_key(str(key)) for key in triage.get("labels") or []]
        revelation = RevelationKernel.from_table(targets, labels, revelation_cfg.get("table") or {})
    else:
        msg = f"Unknown revelation mode '{revelation_mode}', expected 'separable' or 'table'"
        raise ConfigurationError(msg, location="triage.revelation.mode")

    return ProcessModel(kernel, arrivals, initial, revelation)


def _build_operator(config: DictConfig, process: ProcessModel) -> OperatorProfile:
    operator = config.operator
    labels = [label.key for label in process.labels]
    marginal = process.label_marginal.tolist()
    try:
        attention = instantiate(operator.attention, _convert_="all")
        switching = instantiate(operator.switching, labels=labels, marginal=marginal, _convert_="all")
    except InstantiationException as err:
        cause = err.__cause__ if isinstance(err.__cause__, ConfigurationError) else None
        if cause is not None:
            raise cause from err
        msg = f"Cannot build the operator model: {err}"
        raise ConfigurationError(msg, location="operator") from err
    if not isinstance(attention, BaseAttention):
        msg = f"{type(attention).__name__} is not an attention function."
        raise ConfigurationError(msg, location="operator.attention")
    if not isinstance(switching, BaseSwitching):
        msg = f"{type(switching).__name__} is not a switching model."
        raise ConfigurationError(msg, location="operator.switching")

    plain = OmegaConf.to_container(operator, resolve=True)
    success = plain.get("success") or {}
    max_delay = plain.get("max_delay") or {}
    overrides = tuple(SuccessOverride(**entry) for entry in success.get("overrides") or [])
    return OperatorProfile(
        expertise=str(plain.get("expertise", "junior")),
        mean_inspection=plain.get("mean_inspection") or {},
        attention=attention,
        switching=switching,
        aitn_noise=float(plain.get("aitn_noise", 5.0)),
        aitn_min=float(plain.get("aitn_min", 0.1)),
        success=float(success.get("default", 0.9)),
        success_overrides=overrides,
        max_delay=float(max_delay.get("default", 60.0)),
        max_delay_overrides={str(k): float(v) for k, v in (max_delay.get("overrides") or {}).items()},
    )


def _build_am(am: Mapping[str, Any]) -> AmSettings:
    try:
        count_mode = CountMode(am.get("count_mode", CountMode.LABEL.value))
    except ValueError:
        msg = f"Unknown count mode '{am.get('count_mode')}', expected 'label' or 'pair'"
        raise ConfigurationError(msg, location="am.count_mode") from None
    return AmSettings(
        max_deemphasis=int(am.get("max_deemphasis", 3)),
        gamma=float(am.get("gamma", 0.95)),
        kc=float(am.get("kc", 10.0)),
        epsilon=float(am.get("epsilon", 1.0)),
        count_mode=count_mode,
        exploration_episodes=int(am.get("exploration_episodes", 20)),
        evaluation_episodes=int(am.get("evaluation_episodes", 20)),
        convergence_window=int(am.get("convergence_window", 3)),
        resume=am.get("resume"),
    )


def load_scenario(config: DictConfig) -> Scenario:
    """Validate a composed configuration and build the scenario.

    Parameters
    ----------
    config : DictConfig
        Composed configuration with the ``process``, ``triage``, ``operator``,
        ``costs``, ``am`` and ``sim`` sections.

    Returns
    -------
    Scenario
        Fully validated scenario.

    Raises
    ------
    ConfigurationError
        On the first invalid entry, or listing every missing section.

    """
    if config is None:
        config = OmegaConf.create({})
    missing = [key for key in REQUIRED_SECTIONS if key not in config or config[key] is None]
    if missing:
        msg = f"Missing required sections {missing}"
        raise ConfigurationError(msg, location="config")

    try:
        process = _build_process(_section(config, "process"), _section(config, "triage"))
        operator = _build_operator(config, process)
        costs = StageCostTable.from_config(process.labels, _section(config, "costs"))
        am = _build_am(_section(config, "am"))
        sim = _section(config, "sim")
        scenario = Scenario(
            process=process,
            operator=operator,
            costs=costs,
            am=am,
            horizon=int(sim.get("horizon", 12000)),
            shift_length=float(sim.get("shift_length", 86400.0)),
            seed=get_base_seed(sim.get("seed")),
            config=config,
        )
    except OmegaConfBaseException as err:
        msg = f"Invalid configuration entry: {err}"
        raise ConfigurationError(msg, location=getattr(err, "full_key", None)) from err
    except (TypeError, KeyError) as err:
        msg = f"Malformed configuration: {err}"
        raise ConfigurationError(msg, location="config") from err

    # stationary structure is checked at load time
    process.stationary
    LOGGER.info(
        "Scenario loaded, %d labels, %d hidden states, digest %s",
        len(process.labels),
        len(process.states),
        scenario.digest[:12],
    )
    LOGGER.info("Effective configuration:\n%s", OmegaConf.to_yaml(config, resolve=True))
    return scenario
