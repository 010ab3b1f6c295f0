# (C) Copyright 2024 ECMWF.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
# In applying this licence, ECMWF does not waive the privileges and immunities
# granted to it by virtue of its status as an intergovernmental organisation
# nor does it submit to any jurisdiction.

import pytest
from hydra.utils import instantiate
from hypothesis import given
from hypothesis import strategies as st

from anemoi.idos.errors import ConfigurationError
from anemoi.idos.operator.attention import AttentionState
from anemoi.idos.operator.attention import InverseUAttention
from anemoi.idos.operator.attention import TrapezoidAttention
from anemoi.idos.operator.attention import accumulate_eit
from anemoi.idos.operator.attention import loe


@pytest.mark.parametrize(
    ("threshold", "n", "expected"),
    [(2, 1, 1.0), (2, 2, 1.0), (0, 4, 0.0), (0, 2, 0.5), (1, 3, 0.5), (0, 10, 0.0)],
)
def test_trapezoid(threshold: float, n: int, expected: float) -> None:
    assert loe(n, TrapezoidAttention(threshold=threshold, slope=0.25)) == pytest.approx(expected)


def test_trapezoid_floor() -> None:
    assert loe(10, TrapezoidAttention(threshold=0, slope=0.25, floor=0.3)) == pytest.approx(0.3)


@given(threshold=st.integers(0, 6), slope=st.floats(0.0, 1.0), floor=st.floats(0.0, 1.0), n=st.integers(0, 30))
def test_trapezoid_is_bounded_and_non_increasing(threshold: int, slope: float, floor: float, n: int) -> None:
    attention = TrapezoidAttention(threshold=threshold, slope=slope, floor=floor)
    assert 0.0 <= attention(n) <= 1.0
    assert attention(n + 1) <= attention(n)


def test_inverse_u_rises_then_decays() -> None:
    attention = InverseUAttention(threshold=4, slope=0.25, base=0.6)
    assert attention(0) == pytest.approx(0.6)
    assert attention(2) == pytest.approx(0.8)
    assert attention(4) == pytest.approx(1.0)
    assert attention(6) == pytest.approx(0.5)


def test_per_label_thresholds() -> None:
    attention = TrapezoidAttention(threshold=0, slope=0.25, thresholds={"*/high": 2, "cyber/high": 3})
    assert attention.threshold_for("physical/low") == 0
    assert attention.threshold_for("physical/high") == 2
    assert attention.threshold_for("cyber/high") == 3
    assert attention(2, "physical/low") == pytest.approx(0.5)
    assert attention(2, "physical/high") == pytest.approx(1.0)


def test_with_threshold_keeps_shape() -> None:
    attention = InverseUAttention(threshold=1, base=0.5).with_threshold(3)
    assert isinstance(attention, InverseUAttention)
    assert attention.threshold == 3
    assert attention.base == 0.5


@pytest.mark.parametrize(
    ("kwargs", "location"),
    [
        ({"threshold": -1}, "operator.attention.threshold"),
        ({"slope": -0.1}, "operator.attention.slope"),
        ({"floor": 1.5}, "operator.attention.floor"),
    ],
)
def test_invalid_parameters(kwargs: dict, location: str) -> None:
    with pytest.raises(ConfigurationError) as err:
        TrapezoidAttention(**kwargs)
    assert err.value.location == location


def test_instantiate_from_config() -> None:
    attention = instantiate(
        {"_target_": "anemoi.idos.operator.attention.InverseUAttention", "threshold": 2, "base": 0.7},
    )
    assert isinstance(attention, InverseUAttention)
    assert attention(0) == pytest.approx(0.7)


def test_attention_state_advance() -> None:
    state = AttentionState(start_time=10.0, stage=0, label=0, hidden=0, aitn=5.0)
    state.advance(12.0)
    state.efficiency = 0.5
    state.advance(16.0)
    assert state.eit == pytest.approx(4.0)
    assert not state.finished
    state.advance(18.0)
    assert state.finished


def test_accumulate_eit_segments() -> None:
    state = AttentionState(start_time=0.0, stage=0, label=0, hidden=0, aitn=10.0)
    assert accumulate_eit(state, [(1.0, 2.0), (0.25, 4.0), (0.0, 3.0)]) == pytest.approx(3.0)
    with pytest.raises(ValueError, match="non-negative"):
        accumulate_eit(state, [(1.0, -1.0)])
