"""Jitter and shimmer ratios."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from telespeech.analysis.quality import jitter, pooled_jitter, pooled_shimmer, shimmer
from telespeech.analysis.pitch import CycleRun
from telespeech.errors import InsufficientCyclesError


def test_constant_periods_zero_jitter():
    assert jitter([0.005] * 10) == 0.0


def test_alternating_periods_closed_form():
    # |dT| = 0.5 ms everywhere, mean T = 5 ms
    assert jitter([0.00475, 0.00525] * 20) == pytest.approx(0.10)


def test_single_period_insufficient():
    with pytest.raises(InsufficientCyclesError):
        jitter([0.005])


def test_constant_amplitude_zero_shimmer():
    assert shimmer([0.8] * 6) == 0.0


def test_alternating_amplitudes_closed_form():
    assert shimmer([0.9, 1.1] * 10) == pytest.approx(0.2)


def test_shimmer_three_values():
    # mean|d| = 0.5, mean A = 4/3
    assert shimmer([1.0, 1.0, 2.0]) == pytest.approx(0.375)


def test_shimmer_rejects_nonpositive():
    with pytest.raises(ValueError):
        shimmer([1.0, 0.0, 1.0])


def test_shimmer_insufficient():
    with pytest.raises(InsufficientCyclesError):
        shimmer([1.0])


@given(st.lists(st.floats(min_value=1e-4, max_value=0.02), min_size=2, max_size=40))
def test_jitter_nonnegative(periods):
    assert jitter(periods) >= 0.0


@given(st.floats(min_value=1e-4, max_value=0.02), st.integers(min_value=2, max_value=50))
def test_constant_construction_exactly_zero(period, n):
    assert jitter([period] * n) == 0.0
    assert shimmer([1.0] * n) == 0.0


def test_pooled_measures_ignore_run_boundaries():
    runs = [
        CycleRun(np.array([0.005, 0.005]), np.array([1.0, 1.0]), 0),
        CycleRun(np.array([0.006, 0.006]), np.array([1.0, 1.0]), 5000),
    ]
    # no diffs cross the run boundary, so pooled jitter stays 0
    assert pooled_jitter(runs) == 0.0
    assert pooled_shimmer(runs) == 0.0


def test_pooled_requires_a_usable_run():
    with pytest.raises(InsufficientCyclesError):
        pooled_jitter([CycleRun(np.array([0.005]), np.array([1.0]), 0)])
