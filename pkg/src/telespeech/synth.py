"""Synthetic test-signal generators: tones, pulse trains, formant vowels.

Used by the test suite as construction oracles and by the demo seeding
scripts to fabricate reference recordings without a microphone.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .audio import AudioBuffer


def tone(freq_hz: float, duration_s: float, sample_rate: int = 16000, amplitude: float = 0.5) -> AudioBuffer:
    """Pure sine at ``freq_hz``."""
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    return AudioBuffer(amplitude * np.sin(2 * np.pi * freq_hz * t), sample_rate)


def silence(duration_s: float, sample_rate: int = 16000) -> AudioBuffer:
    return AudioBuffer(np.zeros(int(round(duration_s * sample_rate))), sample_rate)


def white_noise(duration_s: float, sample_rate: int = 16000, amplitude: float = 0.3, seed: int = 0) -> AudioBuffer:
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    return AudioBuffer(np.clip(amplitude * rng.standard_normal(n) / 3.0, -1.0, 1.0), sample_rate)


def concat(parts: Sequence[AudioBuffer]) -> AudioBuffer:
    rates = {p.sample_rate for p in parts}
    if len(rates) != 1:
        raise ValueError("cannot concatenate buffers with mixed sample rates")
    return AudioBuffer(np.concatenate([p.samples for p in parts]), rates.pop())


def _smooth_pulse(width: int) -> np.ndarray:
    # Hann bump: keeps pulse energy local so cycle peaks stay at pulse centers.
    return np.hanning(width)


def pulse_train(
    periods_s: Sequence[float],
    sample_rate: int = 16000,
    amplitudes: Sequence[float] | None = None,
    pulse_width_s: float = 0.003,
    lead_s: float = 0.05,
) -> AudioBuffer:
    """Train of smooth pulses with the given inter-pulse periods.

    ``periods_s[i]`` is the gap between pulse i and pulse i+1, so the signal
    carries ``len(periods_s) + 1`` pulses. Peak positions land on exact
    sample indices, making the construction a closed-form oracle for the
    cycle-mark tracker.
    """
    periods = np.asarray(periods_s, dtype=float)
    n_pulses = len(periods) + 1
    amps = np.ones(n_pulses) if amplitudes is None else np.asarray(amplitudes, dtype=float)
    if len(amps) != n_pulses:
        raise ValueError("need one amplitude per pulse")
    positions = np.concatenate([[0.0], np.cumsum(periods)]) + lead_s
    pos_samples = np.round(positions * sample_rate).astype(int)
    width = max(3, int(round(pulse_width_s * sample_rate)) | 1)
    half = width // 2
    total = pos_samples[-1] + half + int(lead_s * sample_rate) + 1
    x = np.zeros(total)
    bump = _smooth_pulse(width)
    for p, a in zip(pos_samples, amps):
        x[p - half : p - half + width] += a * bump
    peak = np.max(np.abs(x))
    if peak > 0:
        x = 0.8 * x / peak
    return AudioBuffer(x, sample_rate)


def steady_pulse_train(
    f0_hz: float, duration_s: float, sample_rate: int = 16000, amplitudes: Sequence[float] | None = None
) -> AudioBuffer:
    n_periods = max(1, int(duration_s * f0_hz))
    periods = [1.0 / f0_hz] * n_periods
    return pulse_train(periods, sample_rate, amplitudes)


def resonator_coeffs(freq_hz: float, bandwidth_hz: float, sample_rate: int) -> np.ndarray:
    """Denominator of a unit-gain two-pole resonator section."""
    r = np.exp(-np.pi * bandwidth_hz / sample_rate)
    theta = 2 * np.pi * freq_hz / sample_rate
    return np.array([1.0, -2.0 * r * np.cos(theta), r * r])


def formant_vowel(
    formants_hz: Sequence[float],
    bandwidths_hz: Sequence[float],
    duration_s: float = 0.8,
    f0_hz: float = 120.0,
    sample_rate: int = 16000,
    f0_contour: np.ndarray | None = None,
    amplitude: float = 0.4,
) -> AudioBuffer:
    """Vowel-like signal: glottal-style pulse train through cascaded resonators.

    ``f0_contour``, when given, must provide one fundamental value per sample
    and overrides the constant ``f0_hz`` (used to build contour-shaped and
    deliberately discontinuous stimuli).
    """
    from scipy.signal import lfilter

    n = int(round(duration_s * sample_rate))
    if f0_contour is None:
        f0_per_sample = np.full(n, float(f0_hz))
    else:
        f0_per_sample = np.asarray(f0_contour, dtype=float)
        n = len(f0_per_sample)

    # Place pulses by integrating instantaneous frequency.
    x = np.zeros(n)
    phase = 0.0
    for i in range(n):
        f = f0_per_sample[i]
        if f <= 0:  # silent/unvoiced stretch
            phase = 0.9  # re-trigger promptly when voicing resumes
            continue
        phase += f / sample_rate
        if phase >= 1.0:
            phase -= 1.0
            x[i] = 1.0
    for f, bw in zip(formants_hz, bandwidths_hz):
        x = lfilter([1.0], resonator_coeffs(f, bw, sample_rate), x)
    peak = np.max(np.abs(x))
    if peak > 0:
        x = amplitude * x / peak
    # Short fades keep frame-edge clicks out of the analysis.
    ramp = min(int(0.01 * sample_rate), n // 4)
    if ramp > 0:
        x[:ramp] *= np.linspace(0, 1, ramp)
        x[-ramp:] *= np.linspace(1, 0, ramp)
    return AudioBuffer(x, sample_rate)


def chirp(f_start_hz: float, f_end_hz: float, duration_s: float, sample_rate: int = 16000, amplitude: float = 0.5) -> AudioBuffer:
    n = int(round(duration_s * sample_rate))
    t = np.arange(n) / sample_rate
    k = (f_end_hz - f_start_hz) / duration_s
    phase = 2 * np.pi * (f_start_hz * t + 0.5 * k * t * t)
    return AudioBuffer(amplitude * np.sin(phase), sample_rate)
