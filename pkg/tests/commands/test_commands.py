# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

from __future__ import annotations

import argparse
from pathlib import Path

import pytest

from anemoi.idos.__main__ import create_parser
from anemoi.idos.commands import COMMANDS
from anemoi.idos.commands.analyze import Analyze
from anemoi.idos.commands.config import ConfigGenerator
from anemoi.idos.commands.config import copy_configs
from anemoi.idos.commands.learn import Learn
from anemoi.idos.commands.simulate import Simulate
from anemoi.idos.commands.sweep import Sweep
from anemoi.idos.commands.validate import Validate
from anemoi.idos.errors import ConsistencyError
from anemoi.idos.errors import InsufficientDataError
from anemoi.idos.errors import UndefinedLabelError
from anemoi.idos.experiments.reporting import read_csv
from anemoi.idos.management.qtable import QTable


def run(command_class: type, argv: list[str]) -> None:
    parser = argparse.ArgumentParser()
    command = command_class()
    command.add_arguments(parser)
    args, unknown = parser.parse_known_args(argv)
    command.run(args, unknown)


def test_copy_configs(tmp_path: Path) -> None:
    copied = copy_configs(tmp_path)
    assert (tmp_path / "config.yaml").is_file()
    assert (tmp_path / "operator" / "attention" / "trapezoid.yaml").is_file()
    assert (tmp_path / "sweep" / "feint_sweep_high.yaml").is_file()
    assert copy_configs(tmp_path) == []
    assert len(copy_configs(tmp_path, overwrite=True)) == len(copied)


def test_config_generate(tmp_path: Path) -> None:
    parser = argparse.ArgumentParser()
    ConfigGenerator.add_arguments(parser)
    ConfigGenerator().run(parser.parse_args(["generate", "--output", str(tmp_path)]))
    assert (tmp_path / "condition1.yaml").is_file()


def test_every_command_registered() -> None:
    parser = create_parser()
    for name in ("analyze", "config", "learn", "simulate", "sweep", "validate"):
        assert name in COMMANDS
    args = parser.parse_args(["sweep", "feint_sweep", "--variant", "feint_sweep_high", "--seed", "5"])
    assert args.command == "sweep"
    assert args.variant == "feint_sweep_high"
    assert args.seed == 5


def test_learn_then_simulate(tmp_path: Path) -> None:
    run(Learn, ["--config-name", "debug", "-o", str(tmp_path), "--episodes", "1", "--seed", "3"])
    for name in ("qtable.tsv", "learn-risk.csv", "learn-history.csv", "learn-regret.csv", "effective-config.yaml"):
        assert (tmp_path / name).is_file()
    _, metadata = read_csv(tmp_path / "learn-risk.csv")
    assert metadata["seed"] == "3"
    assert metadata["exploration_episodes"] == "1"
    table = QTable.load(tmp_path / "qtable.tsv")
    assert table.label_visits.sum() > 0

    qtable = str(tmp_path / "qtable.tsv")
    run(Simulate, ["-c", "debug", "-o", str(tmp_path), "--policy", "optimal", "--qtable", qtable, "--trace"])
    risks, metadata = read_csv(tmp_path / "simulate-optimal.csv")
    assert set(risks["policy"]) == {"optimal"}
    assert len(list((tmp_path / "traces").glob("optimal-*.jsonl"))) == 2


@pytest.mark.parametrize("policy", ["optimal", "fixed_x", "random"])
def test_simulate_rejects_unusable_policies(tmp_path: Path, policy: str) -> None:
    with pytest.raises(SystemExit) as err:
        run(Simulate, ["-c", "debug", "-o", str(tmp_path), "--policy", policy])
    assert err.value.code == 1


def test_analyze(tmp_path: Path) -> None:
    run(Analyze, ["-o", str(tmp_path), "analyze.products.stop=2.0", "analyze.m_max=5"])
    closed, metadata = read_csv(tmp_path / "analyze-closed-form.csv")
    assert metadata["beta"] == "0.1"
    assert len(closed) == 4 * 6
    assert {"p_un", "p_lower", "ecoc", "incomplete", "not_inspected", "reward"} <= set(closed.columns)
    bounds, _ = read_csv(tmp_path / "analyze-bounds.csv")
    assert (bounds["c_min"] <= bounds["ecoc"] + 1e-9).all()
    rewards, _ = read_csv(tmp_path / "analyze-rewards.csv")
    assert set(rewards["m"]) == set(range(6))
    assert (rewards["reward"] >= rewards["lambda_min"] - 1e-9).all()
    curves, _ = read_csv(tmp_path / "analyze-ppoa.csv")
    assert len(curves) == 4 * 20
    assert set(curves["m"]) == {5}


def test_analyze_needs_the_closed_form_conditions(tmp_path: Path) -> None:
    with pytest.raises(SystemExit) as err:
        run(Analyze, ["-c", "benchmark", "-o", str(tmp_path)])
    assert err.value.code == 1


VALIDATE_ARGS = ["sim.shift_length=2000", "validate.m_grid=[0]", "validate.inspections=50", "validate.max_episodes=5"]


def test_validate_passes_with_wide_bands(tmp_path: Path) -> None:
    run(Validate, ["-o", str(tmp_path), *VALIDATE_ARGS, "validate.tolerance.adl=1.0", "validate.tolerance.coc_se=1e6"])
    table, metadata = read_csv(tmp_path / "validate.csv")
    assert metadata["passed"] == "true"
    assert len(table) == 4


def test_validate_exits_with_status_two(tmp_path: Path) -> None:
    with pytest.raises(SystemExit) as err:
        run(Validate, ["-o", str(tmp_path), *VALIDATE_ARGS, "validate.tolerance.adl=0", "validate.tolerance.coc_se=0"])
    assert err.value.code == 2
    assert (tmp_path / "validate.csv").is_file()


def test_sweep(tmp_path: Path) -> None:
    run(Sweep, ["cost_sweep", "-c", "debug", "-o", str(tmp_path), "--episodes", "1", "sweep.values.stop=100.0"])
    table, metadata = read_csv(tmp_path / "cost_sweep.csv")
    assert sorted(set(table["incomplete_cost"])) == [0.0, 100.0]
    assert metadata["warm_start"] == "true"
    assert (tmp_path / "cost_sweep-regret.csv").is_file()


def test_unknown_override_is_a_configuration_error(tmp_path: Path) -> None:
    with pytest.raises(SystemExit) as err:
        run(Learn, ["-c", "debug", "-o", str(tmp_path), "am.unknown_key=1"])
    assert err.value.code == 1


@pytest.mark.parametrize(
    "error",
    [
        InsufficientDataError("no complete inspection of physical/high with m=3"),
        UndefinedLabelError("cyber/low"),
        ConsistencyError("bound above the closed form"),
    ],
)
def test_analysis_errors_exit_with_status_three(tmp_path: Path, mocker, error: Exception) -> None:
    mocker.patch.object(Analyze, "execute", side_effect=error)
    with pytest.raises(SystemExit) as err:
        run(Analyze, ["-o", str(tmp_path)])
    assert err.value.code == 3
