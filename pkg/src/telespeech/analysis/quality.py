"""Cycle-to-cycle voice-quality ratios: local jitter and local shimmer."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..errors import InsufficientCyclesError
from .pitch import CycleRun


def jitter(periods: Sequence[float]) -> float:
    """Local jitter: mean absolute period difference over mean period."""
    t = np.asarray(periods, dtype=np.float64)
    if t.size < 2:
        raise InsufficientCyclesError(f"need >= 2 periods, got {t.size}")
    return float(np.mean(np.abs(np.diff(t))) / np.mean(t))


def shimmer(amplitudes: Sequence[float]) -> float:
    """Local shimmer: mean absolute cycle-peak difference over mean peak."""
    a = np.asarray(amplitudes, dtype=np.float64)
    if a.size < 2:
        raise InsufficientCyclesError(f"need >= 2 cycle amplitudes, got {a.size}")
    if np.any(a <= 0):
        raise ValueError("cycle amplitudes must be positive")
    return float(np.mean(np.abs(np.diff(a))) / np.mean(a))


def _pooled(values_per_run: Iterable[np.ndarray]) -> float:
    """Pool |differences| within runs (never across run boundaries)."""
    diff_sum = 0.0
    diff_count = 0
    all_values: list[np.ndarray] = []
    for v in values_per_run:
        v = np.asarray(v, dtype=np.float64)
        all_values.append(v)
        if v.size >= 2:
            diff_sum += float(np.sum(np.abs(np.diff(v))))
            diff_count += v.size - 1
    if diff_count == 0:
        raise InsufficientCyclesError("no run contributed two consecutive cycles")
    mean = float(np.mean(np.concatenate(all_values)))
    return diff_sum / diff_count / mean


def pooled_jitter(runs: Sequence[CycleRun]) -> float:
    return _pooled(r.periods_s for r in runs)


def pooled_shimmer(runs: Sequence[CycleRun]) -> float:
    return _pooled(r.peak_amplitudes for r in runs)
