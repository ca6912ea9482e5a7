"""Linear prediction (autocorrelation method) and formant picking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, DegenerateFrameError

FORMANT_MIN_HZ = 90.0
FORMANT_EDGE_MARGIN_HZ = 50.0
FORMANT_MAX_BANDWIDTH_HZ = 400.0
MAX_FORMANTS = 3


def default_lpc_order(sample_rate: int) -> int:
    return 2 + sample_rate // 1000


@dataclass(frozen=True)
class Formant:
    frequency_hz: float
    bandwidth_hz: float


def lpc(frame: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Predictor polynomial (a[0]=1) and gain via Levinson-Durbin.

    The returned synthesis filter 1/A(z) is minimum phase: all roots of A
    lie strictly inside the unit circle.
    """
    x = np.asarray(frame, dtype=np.float64)
    if x.size <= order:
        raise ConfigError(f"order {order} must be smaller than frame length {x.size}")
    if not np.any(x):
        raise DegenerateFrameError("all-zero frame")
    r = np.correlate(x, x, mode="full")[x.size - 1 : x.size + order].copy()
    r[0] *= 1.0 + 1e-9  # tiny ridge keeps line spectra numerically positive definite

    a = np.zeros(order + 1)
    a[0] = 1.0
    err = float(r[0])
    if err <= 0:
        raise DegenerateFrameError("non-positive frame energy")
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1 : 0 : -1])
        k = -acc / err
        prev = a[1:i].copy()
        a[1:i] = prev + k * prev[::-1]
        a[i] = k
        err *= 1.0 - k * k
        if err <= 0:
            raise DegenerateFrameError("Levinson recursion collapsed")
    return a, float(np.sqrt(err))


def formants(frame: np.ndarray, sample_rate: int, order: int | None = None) -> list[Formant]:
    """Up to three formants from LPC roots, sorted by frequency.

    Roots become (frequency, bandwidth) pairs; only sharp in-band resonances
    (bandwidth < 400 Hz, 90 Hz < f < Nyquist - 50 Hz) qualify. A frame with no
    qualifying root yields an empty list, not an error.
    """
    if order is None:
        order = default_lpc_order(sample_rate)
    a, _gain = lpc(frame, order)
    roots = np.roots(a)
    roots = roots[np.imag(roots) > 1e-8]  # one per conjugate pair
    freqs = np.angle(roots) * sample_rate / (2 * np.pi)
    mags = np.abs(roots)
    bws = -(sample_rate / np.pi) * np.log(np.maximum(mags, 1e-12))
    found = [
        Formant(float(f), float(bw))
        for f, bw in zip(freqs, bws)
        if FORMANT_MIN_HZ < f < sample_rate / 2 - FORMANT_EDGE_MARGIN_HZ
        and 0 < bw < FORMANT_MAX_BANDWIDTH_HZ
    ]
    found.sort(key=lambda fm: fm.frequency_hz)
    return found[:MAX_FORMANTS]
