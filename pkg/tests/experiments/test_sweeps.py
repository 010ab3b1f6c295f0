# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from pathlib import Path

import numpy as np
import pytest
from omegaconf import DictConfig
from omegaconf import OmegaConf
from pytest_mock import MockerFixture

from anemoi.idos.analytics.closed_form import ClosedFormContext
from anemoi.idos.analytics.closed_form import ecoc_closed_form
from anemoi.idos.errors import ConfigurationError
from anemoi.idos.experiments.budget import BudgetModel
from anemoi.idos.experiments.budget import expected_attack_cost
from anemoi.idos.experiments.budget import solve_rate
from anemoi.idos.experiments.reporting import read_csv
from anemoi.idos.experiments.sweeps import SweepSpec
from anemoi.idos.experiments.sweeps import point_config
from anemoi.idos.experiments.sweeps import run_experiment
from anemoi.idos.experiments.sweeps import save_experiment
from anemoi.idos.simulation.scenario import load_scenario


@pytest.fixture
def cost_spec() -> SweepSpec:
    return SweepSpec(
        name="cost_sweep",
        variable="incomplete_cost",
        values=(0.0, 300.0),
        exploration_episodes=1,
        evaluation_episodes=2,
    )


def test_grids_include_their_stop(make_config) -> None:
    config = make_config("debug", ["sweep=cost_sweep"])
    spec = SweepSpec.from_config(OmegaConf.to_container(config.sweep, resolve=True))
    assert spec.values == tuple(float(v) for v in range(0, 1001, 100))
    assert spec.warm_start
    assert spec.estimator == "every"


def test_high_cost_feint_variant(make_config) -> None:
    config = make_config("debug", ["sweep=feint_sweep_high"])
    spec = SweepSpec.from_config(OmegaConf.to_container(config.sweep, resolve=True))
    assert spec.name == "feint_sweep"
    assert len(spec.values) == 11
    assert spec.budget_model.feint_cost == pytest.approx(0.02)


@pytest.mark.parametrize(
    ("entries", "location"),
    [
        ({"name": "other"}, "sweep.name"),
        ({"variable": "shift"}, "sweep.variable"),
        ({"values": ()}, "sweep.values"),
        ({"variable": "eta_fe", "values": (0.5, 1.5)}, "sweep.values"),
        ({"variable": "rho", "values": (0.0,)}, "sweep.values"),
        ({"policies": ("optimal", "random")}, "sweep.policies"),
    ],
)
def test_invalid_specs(entries: dict, location: str) -> None:
    spec = {"name": "convergence", "variable": "replicate", "values": (0.0,), **entries}
    with pytest.raises(ConfigurationError) as err:
        SweepSpec(**spec)
    assert err.value.location == location


def test_point_config(config: DictConfig) -> None:
    spec = SweepSpec(name="cost_sweep", variable="incomplete_cost", values=(500.0,))
    point = point_config(config, spec, 500.0)
    assert point.costs.incomplete == 500.0
    assert point.costs.not_inspected == 500.0
    assert config.costs.incomplete == 300.0


def test_feint_points_spend_the_budget(config: DictConfig) -> None:
    spec = SweepSpec(name="feint_sweep", variable="eta_fe", values=(0.3,))
    point = point_config(config, spec, 0.3)
    assert point.process.kernel.eta_fe == 0.3
    assert point.process.arrivals.mode == "poisson"
    assert point.process.arrivals.rate == pytest.approx(solve_rate(BudgetModel.from_config({}), 0.3))


def test_feint_points_need_an_independent_kernel(make_config) -> None:
    config = make_config("debug", ["process.kernel.mode=table"])
    spec = SweepSpec(name="feint_sweep", variable="eta_fe", values=(0.3,))
    with pytest.raises(ConfigurationError):
        point_config(config, spec, 0.3)


def test_cost_sweep(config: DictConfig, cost_spec: SweepSpec, mocker: MockerFixture, tmp_path: Path) -> None:
    tracker = mocker.Mock()
    result = run_experiment("cost_sweep", config, sweep=cost_spec, tracker=tracker)

    table = result.table
    assert len(table) == 2 * 4
    assert table["incomplete_cost"].tolist() == [0.0] * 4 + [300.0] * 4
    for column in ("risk_optimal", "risk_default", "se_optimal", "margin", "margin_se", "action", "converged"):
        assert column in table
    assert "attack_cost" not in table
    assert set(result.extras) == {"history", "regret"}
    assert tracker.log_metrics.call_count == 2
    assert [c.kwargs["step"] for c in tracker.log_metrics.call_args_list] == [0, 1]

    paths = save_experiment(result, tmp_path, config)
    assert sorted(p.name for p in paths) == [
        "cost_sweep-history.csv",
        "cost_sweep-regret.csv",
        "cost_sweep.csv",
        "effective-config.yaml",
    ]
    written, metadata = read_csv(tmp_path / "cost_sweep.csv")
    assert len(written) == len(table)
    assert metadata["experiment"] == "cost_sweep"
    assert metadata["estimator"] == "every"


def test_feint_sweep_without_learning(config: DictConfig) -> None:
    spec = SweepSpec(name="feint_sweep", variable="eta_fe", values=(0.5,), policies=("default",), fixed=(2,))
    result = run_experiment("feint_sweep", config, sweep=spec)
    table = result.table
    assert {"risk_default", "risk_fixed_2"} <= set(table.columns)
    assert "risk_optimal" not in table
    assert result.extras == {}
    # the rate is solved so the attacker spends exactly the budget
    assert np.allclose(table["attack_cost"], 270.0)


def test_experiment_name_must_match(config: DictConfig, cost_spec: SweepSpec) -> None:
    with pytest.raises(ConfigurationError):
        run_experiment("freq_sweep", config, sweep=cost_spec)


def spec_of(config: DictConfig) -> SweepSpec:
    return SweepSpec.from_config(OmegaConf.to_container(config.sweep, resolve=True))


def default_risk(config: DictConfig, spec: SweepSpec, value: float, label: str) -> float:
    """Closed-form risk of the default policy at one sweep point."""
    ctx = ClosedFormContext.from_scenario(load_scenario(point_config(config, spec, value)))
    return ecoc_closed_form(ctx, label, 0) / (1.0 - ctx.gamma)


def test_freq_sweep_shape(make_config) -> None:
    config = make_config("condition1", ["sweep=freq_sweep"])
    spec = spec_of(config)
    budget = spec.budget_model
    costs = []
    for rho in spec.values:
        scenario = load_scenario(point_config(config, spec, rho))
        costs.append(expected_attack_cost(budget, scenario.process))
    # rate 0.1 at rho 1, half feints
    assert np.allclose(np.array(costs) * np.array(spec.values), 86400.0 * 0.1 * (0.5 * 0.004 + 0.5 * 0.04))
    for label in ("physical/low", "physical/high", "cyber/low", "cyber/high"):
        risks = [default_risk(config, spec, rho, label) for rho in spec.values]
        assert np.all(np.diff(risks) <= 1e-9)


def test_feint_sweep_rises_with_cheap_feints(make_config) -> None:
    config = make_config("condition1", ["sweep=feint_sweep"])
    spec = spec_of(config)
    risks = [default_risk(config, spec, eta, "physical/high") for eta in spec.values]
    assert np.all(np.diff(risks) > 0.0)


def test_feint_sweep_peaks_inside_with_costly_feints(make_config) -> None:
    config = make_config("condition1", ["sweep=feint_sweep_high"])
    spec = spec_of(config)
    risks = [default_risk(config, spec, eta, "physical/high") for eta in spec.values]
    peak = int(np.argmax(risks))
    assert 0 < peak < len(risks) - 1
    assert risks[peak] > risks[-1] > risks[0]


def risk_by_value(table, variable: str, label: str, column: str) -> dict[float, float]:
    rows = table[table["label"] == label]
    return dict(zip(rows[variable], rows[column]))


@pytest.mark.slow
def test_freq_sweep_simulated_risk_falls(make_config) -> None:
    config = make_config("condition1", ["sim.seed=7", "sim.shift_length=20000"])
    spec = SweepSpec(name="freq_sweep", variable="rho", values=(0.5, 4.0), policies=("default",), evaluation_episodes=3)
    table = run_experiment("freq_sweep", config, sweep=spec).table
    costs = risk_by_value(table, "rho", "physical/high", "attack_cost")
    assert costs[0.5] == pytest.approx(8.0 * costs[4.0])
    for label in ("physical/low", "physical/high", "cyber/low", "cyber/high"):
        risks = risk_by_value(table, "rho", label, "risk_default")
        assert risks[4.0] < risks[0.5]


@pytest.mark.slow
def test_attention_sweep_simulated_risk_does_not_rise(config: DictConfig) -> None:
    spec = SweepSpec(
        name="attention_sweep",
        variable="n_bar0",
        values=(0.0, 6.0),
        policies=("default",),
        evaluation_episodes=4,
    )
    table = run_experiment("attention_sweep", config, sweep=spec).table
    for label in table["label"].unique():
        risks = risk_by_value(table, "n_bar0", label, "risk_default")
        errors = risk_by_value(table, "n_bar0", label, "se_default")
        assert risks[6.0] <= risks[0.0] + 3.0 * np.hypot(errors[0.0], errors[6.0])
