# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

"""Event loop interleaving attack arrivals, inspections, switching and learning."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from anemoi.idos.management.costs import accumulate_coc
from anemoi.idos.management.policy import Policy
from anemoi.idos.management.policy import select_action
from anemoi.idos.management.qtable import QTable
from anemoi.idos.management.qtable import learning_rate
from anemoi.idos.management.qtable import q_update
from anemoi.idos.operator.attention import AttentionState
from anemoi.idos.operator.response import AlertResponse
from anemoi.idos.operator.response import draw_aitn
from anemoi.idos.operator.response import resolve_response
from anemoi.idos.process.sequence import SeedLike
from anemoi.idos.process.sequence import reveal_labels
from anemoi.idos.process.sequence import sample_attack_sequence
from anemoi.idos.simulation.log import EpisodeLog
from anemoi.idos.simulation.log import InspectionRecords
from anemoi.idos.simulation.log import StageRecords
from anemoi.idos.simulation.scenario import Scenario

LOGGER = logging.getLogger(__name__)

CODES = {response: code for code, response in enumerate(AlertResponse)}
NOT_INSPECTED = CODES[AlertResponse.NOT_INSPECTED]


@dataclass
class LearnMode:
    """Explore with an epsilon-greedy policy and update ``qtable`` in place.

    ``epsilon`` defaults to the scenario's exploration rate.
    """

    qtable: QTable
    epsilon: float | None = None

    name = "learn"


@dataclass(frozen=True)
class EvaluateMode:
    """Follow ``policy``, reading Q values from ``qtable`` when given."""

    policy: Policy
    qtable: QTable | None = None

    @property
    def name(self) -> str:
        return self.policy.name


EpisodeMode = Union[LearnMode, EvaluateMode]


def _seed_info(seed: SeedLike) -> dict:
    if isinstance(seed, np.random.SeedSequence):
        return {"entropy": str(seed.entropy), "spawn_key": list(seed.spawn_key)}
    if isinstance(seed, (int, np.integer)):
        return {"entropy": str(int(seed)), "spawn_key": []}
    return {}


class _Inspections:
    """Column buffers of the inspection records."""

    def __init__(self) -> None:
        self.columns: dict[str, list] = {key: [] for key in InspectionRecords.__dataclass_fields__}

    def append(self, **row) -> None:
        for key, value in row.items():
            self.columns[key].append(value)

    def freeze(self) -> InspectionRecords:
        dtypes = {
            "stages": np.int64,
            "labels": np.int64,
            "actions": np.int64,
            "responses": np.int8,
            "truncated": bool,
        }
        return InspectionRecords(
            **{key: np.asarray(values, dtype=dtypes.get(key, float)) for key, values in self.columns.items()},
        )


def run_episode(scenario: Scenario, mode: EpisodeMode, seed: SeedLike = None) -> EpisodeLog:
    """Run one shift of alert arrivals through the operator and the attention manager.

    At every arrival after the first, in order:

    * a finished operator resolves the inspected alert and picks up the new one, unless
      the switching model ignores de-emphasized arrivals while idle;
    * an inspection that reached its maximum allowable delay is abandoned with an
      incomplete response, the operator is then idle and picks up the new alert as
      a finished operator would;
    * an operator who switches abandons the inspected alert with an incomplete
      response and picks up the new one;
    * otherwise the new alert is not inspected, and an emphasized one distracts the
      operator.

    Every hand-off closes the consolidated cost of the inspection, updates the Q
    table in learn mode and selects the next de-emphasis action. The inspection open
    at the end of the shift is resolved from the time accumulated so far, marked
    truncated and never learned from.

    Parameters
    ----------
    scenario : Scenario
        Validated scenario.
    mode : LearnMode | EvaluateMode
        Learning or fixed-policy evaluation.
    seed : int, SeedSequence or Generator, optional
        Stream of the episode, every draw of the episode comes from it.

    Returns
    -------
    EpisodeLog
        Stage and inspection records.

    """
    rng = np.random.default_rng(seed)
    process = scenario.process
    operator = scenario.operator
    tables = scenario.tables
    am = scenario.am
    costs = scenario.costs
    switching = operator.switching
    attention = operator.attention
    learn = isinstance(mode, LearnMode)
    qtable = mode.qtable
    epsilon = am.epsilon if not learn or mode.epsilon is None else mode.epsilon
    if qtable is not None and qtable.n_actions != am.max_deemphasis + 1:
        msg = f"Q table has {qtable.n_actions} actions, the scenario allows {am.max_deemphasis + 1}."
        raise ValueError(msg)

    sequence = sample_attack_sequence(process.kernel, process.arrivals, process.initial, scenario.horizon, rng)
    kept = int(np.searchsorted(sequence.times, scenario.shift_length, side="left"))
    times = sequence.times[:kept]
    hidden = sequence.indices[:kept]
    labels = reveal_labels(sequence, process.revelation, rng)[:kept]
    types = [state.type for state in process.states]

    n_stages = times.size
    emphasized = np.ones(n_stages, dtype=bool)
    responses = np.full(n_stages, NOT_INSPECTED, dtype=np.int8)
    inspections = _Inspections()

    def choose(label: int) -> int:
        if learn:
            return select_action(qtable, label, epsilon, rng).m
        return mode.policy(label).m

    def start(k: int) -> AttentionState:
        s, x = int(labels[k]), int(hidden[k])
        aitn = draw_aitn(tables.mean_inspection[s, x], operator.aitn_noise, operator.aitn_min, rng)
        return AttentionState(
            start_time=float(times[k]),
            stage=k,
            label=s,
            hidden=x,
            aitn=aitn,
            attack_type=types[x],
            success=float(tables.success[s, x]),
            efficiency=attention.efficiency(0, tables.thresholds[s]),
        )

    def q_value(label: int, action: int) -> float:
        if qtable is None or action >= qtable.n_actions:
            return float("nan")
        return float(qtable.values[label, action])

    if n_stages:
        state = start(0)
        action = int(rng.integers(am.max_deemphasis + 1)) if learn else choose(state.label)
        coc = 0.0
        # time the inspection was abandoned at its maximum allowable delay
        expired: float | None = None

    for k in range(1, n_stages):
        t = float(times[k])
        s_new = int(labels[k])
        emph = k - state.stage > action
        emphasized[k] = emph
        if expired is None:
            state.advance(t)
            if not state.finished and t - state.start_time >= tables.max_delay[state.label]:
                expired = t

        if expired is not None or state.finished:
            handoff = switching.picks_up_when_idle(emph)
        else:
            handoff = switching.switch(state.label, k - state.stage, s_new, emph, rng)

        if not handoff:
            responses[k] = NOT_INSPECTED
            coc = accumulate_coc(coc, AlertResponse.NOT_INSPECTED, s_new, costs)
            if emph and expired is None:
                state.distractions += 1
                state.efficiency = attention.efficiency(state.distractions, tables.thresholds[state.label])
            continue

        response = AlertResponse.INCOMPLETE if expired is not None else resolve_response(state, rng)
        code = CODES[response]
        responses[state.stage] = code
        coc = accumulate_coc(coc, response, state.label, costs)
        if learn:
            visits = qtable.next_visit(state.label, action, am.count_mode)
            alpha = learning_rate(am.kc, visits)
            q_update(qtable, state.label, action, coc, s_new, alpha, am.gamma)
        inspections.append(
            stages=state.stage,
            labels=state.label,
            actions=action,
            responses=code,
            costs=coc,
            starts=state.start_time,
            ends=t if expired is None else expired,
            aitn=state.aitn,
            eit=state.eit,
            q_values=q_value(state.label, action),
            truncated=False,
        )

        state = start(k)
        action = choose(s_new)
        coc = 0.0
        expired = None

    if n_stages:
        response = AlertResponse.INCOMPLETE if expired is not None else resolve_response(state, rng)
        code = CODES[response]
        responses[state.stage] = code
        coc = accumulate_coc(coc, response, state.label, costs)
        inspections.append(
            stages=state.stage,
            labels=state.label,
            actions=action,
            responses=code,
            costs=coc,
            starts=state.start_time,
            ends=float(times[-1]) if expired is None else expired,
            aitn=state.aitn,
            eit=state.eit,
            q_values=q_value(state.label, action),
            truncated=True,
        )

    log = EpisodeLog(
        stages=StageRecords(times.copy(), hidden.copy(), labels.copy(), emphasized, responses),
        inspections=inspections.freeze(),
        label_keys=tuple(scenario.label_keys),
        state_keys=tuple(x.key for x in process.states),
        policy=mode.name,
        seed=_seed_info(seed),
        digest=scenario.digest,
    )
    LOGGER.debug(
        "Episode finished, %d stages, %d inspections, policy %s",
        n_stages,
        len(log.inspections),
        mode.name,
    )
    return log


def stage_gaps(log: EpisodeLog) -> np.ndarray:
    """Number of stages between consecutive inspection starts."""
    return np.diff(log.inspections.stages)
