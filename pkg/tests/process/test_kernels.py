# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

import numpy as np
import pytest
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.errors import UndefinedLabelError
from anemoi.idos.process.kernels import RevelationKernel
from anemoi.idos.process.kernels import TypeTargetKernel
from anemoi.idos.process.kernels import attack_states
from anemoi.idos.process.kernels import category_transition_kernel
from anemoi.idos.process.kernels import posterior
from anemoi.idos.process.kernels import stationary_distribution
from anemoi.idos.process.types import AttackState
from anemoi.idos.process.types import AttackType
from anemoi.idos.process.types import CategoryLabel

TARGETS = ["physical", "cyber"]
CRITICALITY = {"feint": {"low": 0.8, "high": 0.2}, "real": {"low": 0.2, "high": 0.8}}


@pytest.fixture
def revelation() -> RevelationKernel:
    return RevelationKernel.separable(TARGETS, ["low", "high"], CRITICALITY)


def test_attack_states_are_type_major() -> None:
    states = attack_states(TARGETS)
    assert [s.key for s in states] == ["feint/physical", "feint/cyber", "real/physical", "real/cyber"]


@pytest.mark.parametrize("targets", [[], ["a", "a"]])
def test_attack_states_rejects_bad_targets(targets: list) -> None:
    with pytest.raises(ConfigurationError):
        attack_states(targets)


def test_independent_kernel_rows() -> None:
    kernel = TypeTargetKernel.independent(TARGETS, 0.3)
    expected = np.array([0.15, 0.15, 0.35, 0.35])
    assert np.allclose(kernel.matrix, expected[None, :])


def test_kernel_rejects_non_stochastic_rows() -> None:
    with pytest.raises(ConfigurationError, match="sum to") as err:
        TypeTargetKernel.from_table(["a"], {"feint/a": {"feint/a": 0.5}, "real/a": {"real/a": 1.0}})
    assert err.value.location == "process.kernel"


def test_kernel_rejects_unknown_state() -> None:
    with pytest.raises(ConfigurationError):
        TypeTargetKernel.from_table(["a"], {"feint/b": {"feint/a": 1.0}})


def test_stationary_two_state_chain() -> None:
    kernel = TypeTargetKernel.from_table(
        ["a"],
        {"feint/a": {"feint/a": 0.9, "real/a": 0.1}, "real/a": {"feint/a": 0.5, "real/a": 0.5}},
    )
    b = stationary_distribution(kernel)
    assert np.allclose(b.probabilities, [5 / 6, 1 / 6])
    assert b[AttackState(AttackType.REAL, "a")] == pytest.approx(1 / 6)


def test_stationary_requires_single_closed_class() -> None:
    kernel = TypeTargetKernel.from_table(["a"], {"feint/a": {"feint/a": 1.0}, "real/a": {"real/a": 1.0}})
    with pytest.raises(ConfigurationError, match="closed classes"):
        stationary_distribution(kernel)


def test_stationary_gives_transient_states_no_mass() -> None:
    kernel = TypeTargetKernel.independent(TARGETS, 1.0)
    b = stationary_distribution(kernel)
    assert np.allclose(b.probabilities, [0.5, 0.5, 0.0, 0.0])


@settings(max_examples=30, deadline=None)
@given(
    eta_fe=st.floats(min_value=0.0, max_value=1.0),
    weight=st.floats(min_value=0.05, max_value=0.95),
)
def test_stationary_is_invariant(eta_fe: float, weight: float) -> None:
    kernel = TypeTargetKernel.independent(TARGETS, eta_fe, {"physical": weight, "cyber": 1.0 - weight})
    b = stationary_distribution(kernel).probabilities
    assert b.sum() == pytest.approx(1.0)
    assert np.abs(b - b @ kernel.matrix).sum() <= 1e-8


def test_separable_revelation_reveals_source(revelation: RevelationKernel) -> None:
    assert [label.key for label in revelation.labels] == ["physical/low", "physical/high", "cyber/low", "cyber/high"]
    # feint/physical only ever produces physical labels
    assert np.allclose(revelation.matrix[0], [0.8, 0.2, 0.0, 0.0])
    assert np.allclose(revelation.matrix.sum(axis=1), 1.0)


def test_separable_revelation_needs_every_type() -> None:
    with pytest.raises(ConfigurationError) as err:
        RevelationKernel.separable(TARGETS, ["low", "high"], {"feint": {"low": 1.0}})
    assert err.value.location == "triage.revelation.criticality"


def test_posterior_benchmark(revelation: RevelationKernel) -> None:
    b = stationary_distribution(TypeTargetKernel.independent(TARGETS, 0.5))
    assert np.allclose(posterior(revelation, b, "physical/low"), [0.8, 0.0, 0.2, 0.0])
    assert np.allclose(posterior(revelation, b, CategoryLabel("cyber", "high")), [0.0, 0.2, 0.0, 0.8])


def test_posterior_of_impossible_label(revelation: RevelationKernel) -> None:
    b = stationary_distribution(TypeTargetKernel.independent(TARGETS, 0.5, {"physical": 1.0}))
    with pytest.raises(UndefinedLabelError):
        posterior(revelation, b, "cyber/low")


def test_category_kernel_of_independent_chain_repeats_marginal(revelation: RevelationKernel) -> None:
    kernel = TypeTargetKernel.independent(TARGETS, 0.3)
    b = stationary_distribution(kernel)
    category = category_transition_kernel(kernel, revelation, b)
    assert np.allclose(category.matrix, category.marginal[None, :])
    assert np.allclose(category.matrix.sum(axis=1), 1.0)


def test_category_kernel_matches_joint_frequencies(revelation: RevelationKernel) -> None:
    kernel = TypeTargetKernel.from_table(
        TARGETS,
        {
            "feint/physical": {"feint/cyber": 0.7, "real/physical": 0.3},
            "feint/cyber": {"real/cyber": 0.6, "feint/physical": 0.4},
            "real/physical": {"feint/physical": 1.0},
            "real/cyber": {"feint/cyber": 0.5, "real/physical": 0.5},
        },
    )
    b = stationary_distribution(kernel)
    category = category_transition_kernel(kernel, revelation, b)

    rng = np.random.default_rng(0)
    n = 1_000_000

    def draw(rows: np.ndarray) -> np.ndarray:
        cumulative = np.cumsum(rows, axis=1)
        return np.minimum((rng.random(len(rows))[:, None] >= cumulative).sum(axis=1), 3)

    hidden = rng.choice(4, size=n, p=b.probabilities)
    following = draw(kernel.matrix[hidden])
    labels = draw(revelation.matrix[hidden])
    next_labels = draw(revelation.matrix[following])
    joint = np.zeros((4, 4))
    np.add.at(joint, (labels, next_labels), 1.0)
    joint /= joint.sum()
    expected = category.marginal[:, None] * category.matrix
    assert np.abs(joint - expected).sum() < 0.01


def test_category_row_of_undefined_label(revelation: RevelationKernel) -> None:
    kernel = TypeTargetKernel.independent(TARGETS, 0.5, {"physical": 1.0})
    category = category_transition_kernel(kernel, revelation, stationary_distribution(kernel))
    assert not category.defined[2]
    with pytest.raises(UndefinedLabelError):
        category["cyber/low"]
    assert np.allclose(category["physical/low"].sum(), 1.0)
