"""Fundamental-frequency tracking and glottal cycle marks.

Per-frame f0 comes from the peak of the normalized autocorrelation (NCC)
inside the configured lag band, refined by parabolic interpolation. A frame
is voiced only when the peak clears the voicing threshold and the frame RMS
clears the utterance-relative silence floor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..audio import AudioBuffer
from ..errors import ConfigError
from .framing import FrameSequence, energy_contour

DEFAULT_F0_MIN = 100.0
DEFAULT_F0_MAX = 600.0
DEFAULT_VOICING_THRESHOLD = 0.45
DEFAULT_SILENCE_FLOOR_DB = 40.0  # below the loudest frame
# A smaller-lag peak this close to the global maximum wins, which keeps the
# tracker off subharmonics (half/third f0) on clean periodic signals, jittered
# pulse trains included.
PEAK_ACCEPT_RATIO = 0.85
MIN_RUN_CYCLES = 3


@dataclass(frozen=True)
class PitchContour:
    voiced: np.ndarray  # bool per frame
    f0: np.ndarray  # Hz, NaN where unvoiced
    frame_times: np.ndarray  # frame start times, seconds
    sample_rate: int
    frame_length: int
    hop_length: int

    @property
    def n_frames(self) -> int:
        return len(self.voiced)

    def voiced_runs(self) -> list[tuple[int, int]]:
        """Contiguous voiced stretches as inclusive (first, last) frame indices."""
        runs = []
        start = None
        for i, v in enumerate(self.voiced):
            if v and start is None:
                start = i
            elif not v and start is not None:
                runs.append((start, i - 1))
                start = None
        if start is not None:
            runs.append((start, self.n_frames - 1))
        return runs


def _normalized_autocorr(x: np.ndarray, lag_lo: int, lag_hi: int) -> np.ndarray:
    """NCC values for lags ``lag_lo..lag_hi`` (RAPT-style normalization)."""
    n = len(x)
    cross = np.correlate(x, x, mode="full")[n - 1 :]
    energy = x * x
    prefix = np.concatenate([[0.0], np.cumsum(energy)])
    total = prefix[-1]
    lags = np.arange(lag_lo, lag_hi + 1)
    e_head = prefix[n - lags]  # energy of x[0 : n-lag]
    e_tail = total - prefix[lags]  # energy of x[lag : n]
    denom = np.sqrt(e_head * e_tail)
    out = np.zeros(len(lags))
    ok = denom > 0
    out[ok] = cross[lags[ok]] / denom[ok]
    return out


def _refine_peak(ncc: np.ndarray, idx: int) -> float:
    """Parabolic interpolation of the peak position, in index units."""
    if idx <= 0 or idx >= len(ncc) - 1:
        return float(idx)
    y0, y1, y2 = ncc[idx - 1], ncc[idx], ncc[idx + 1]
    denom = y0 - 2 * y1 + y2
    if denom == 0:
        return float(idx)
    delta = 0.5 * (y0 - y2) / denom
    return float(idx) + float(np.clip(delta, -0.5, 0.5))


def pitch_contour(
    frames: FrameSequence,
    f0_min: float = DEFAULT_F0_MIN,
    f0_max: float = DEFAULT_F0_MAX,
    voicing_threshold: float = DEFAULT_VOICING_THRESHOLD,
    silence_floor_db: float = DEFAULT_SILENCE_FLOOR_DB,
) -> PitchContour:
    if not (0 < f0_min < f0_max):
        raise ConfigError(f"need 0 < f0_min < f0_max, got {f0_min}/{f0_max}")
    rate = frames.sample_rate
    if frames.frame_length < 2 * rate / f0_min:
        raise ConfigError(
            f"frame of {frames.frame_length} samples cannot hold two periods of {f0_min} Hz"
        )
    lag_min = max(2, int(np.floor(rate / f0_max)))
    lag_max = min(int(np.ceil(rate / f0_min)), frames.frame_length - 2)
    if lag_max <= lag_min:
        raise ConfigError("lag band empty for this frame length")
    # One extra lag each side so the parabola at band edges has neighbors.
    lo, hi = lag_min - 1, lag_max + 1

    rms, _ = energy_contour(frames)
    floor = float(np.max(rms)) * 10.0 ** (-silence_floor_db / 20.0)

    n = frames.n_frames
    voiced = np.zeros(n, dtype=bool)
    f0 = np.full(n, np.nan)
    for k in range(n):
        if rms[k] < floor or rms[k] == 0.0:
            continue
        x = frames.frames[k]
        x = x - np.mean(x)
        ncc = _normalized_autocorr(x, lo, hi)
        band = ncc[1:-1]  # the true lag band
        best = float(np.max(band))
        if best < voicing_threshold:
            continue
        accept = max(voicing_threshold, PEAK_ACCEPT_RATIO * best)
        interior = (band[1:-1] >= band[:-2]) & (band[1:-1] >= band[2:]) & (band[1:-1] >= accept)
        candidates = np.nonzero(interior)[0] + 1
        pick = int(candidates[0]) if len(candidates) else int(np.argmax(band))
        refined = _refine_peak(ncc, pick + 1) + lo
        hz = rate / refined
        voiced[k] = True
        f0[k] = float(np.clip(hz, f0_min, f0_max))
    return PitchContour(
        voiced, f0, frames.frame_times, rate, frames.frame_length, frames.hop_length
    )


@dataclass(frozen=True)
class CycleRun:
    """Consecutive glottal cycles inside one voiced run."""

    periods_s: np.ndarray
    peak_amplitudes: np.ndarray
    start_sample: int


def _local_period_samples(contour: PitchContour, sample_idx: int, run: tuple[int, int]) -> float:
    frame = int(np.clip(sample_idx // contour.hop_length, run[0], run[1]))
    hz = contour.f0[frame]
    if not np.isfinite(hz):
        hz = np.nanmean(contour.f0[run[0] : run[1] + 1])
    return contour.sample_rate / float(hz)


def pitch_periods(buf: AudioBuffer, contour: PitchContour, min_cycles: int = MIN_RUN_CYCLES) -> list[CycleRun]:
    """Cycle marks (waveform peaks at f0-guided spacing) per voiced run.

    Fully unvoiced input yields an empty list. Runs recovering fewer than
    ``min_cycles`` periods are skipped.
    """
    x = np.asarray(buf.samples, dtype=np.float64)
    out: list[CycleRun] = []
    for run in contour.voiced_runs():
        i0, i1 = run
        s0 = i0 * contour.hop_length
        s1 = min(i1 * contour.hop_length + contour.frame_length, len(x))
        seg = x[s0:s1]
        if len(seg) == 0:
            continue
        polarity = 1.0 if seg.max() >= -seg.min() else -1.0
        y = polarity * seg
        top = float(np.max(y))
        if top <= 0:
            continue
        amp_floor = 0.1 * top

        marks = [int(np.argmax(y))]
        # forward walk
        while True:
            t = marks[-1]
            period = _local_period_samples(contour, s0 + t, run)
            lo = t + int(round(0.5 * period))
            hi = min(t + int(round(1.5 * period)) + 1, len(y))
            if lo >= hi:
                break
            nxt = lo + int(np.argmax(y[lo:hi]))
            if y[nxt] < amp_floor:
                break
            marks.append(nxt)
        # backward walk
        while True:
            t = marks[0]
            period = _local_period_samples(contour, s0 + t, run)
            hi = t - int(round(0.5 * period)) + 1
            lo = max(t - int(round(1.5 * period)), 0)
            if hi <= lo:
                break
            prv = lo + int(np.argmax(y[lo:hi]))
            if y[prv] < amp_floor:
                break
            marks.insert(0, prv)

        marks_arr = np.array(sorted(set(marks)))
        if len(marks_arr) < 2:
            continue
        periods = np.diff(marks_arr) / contour.sample_rate
        amps = y[marks_arr[1:]]
        # belt and suspenders: drop cycles straying >50% from the frame-local period
        keep = np.ones(len(periods), dtype=bool)
        for j, m in enumerate(marks_arr[1:]):
            t_local = _local_period_samples(contour, s0 + m, run) / contour.sample_rate
            keep[j] = abs(periods[j] - t_local) < 0.5 * t_local
        periods, amps = periods[keep], amps[keep]
        if len(periods) >= min_cycles:
            out.append(CycleRun(periods, amps, s0 + int(marks_arr[0])))
    return out
