"""Frame spectra, summary statistics, and the utterance spectrogram."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..audio import AudioBuffer
from ..errors import DegenerateFrameError
from .framing import LOG_FLOOR, FrameSequence, frame_signal

BALANCE_SPLIT_HZ = 1000.0
ROLLOFF_FRACTION = 0.85
TILT_MIN_HZ = 100.0
# Bins more than 60 dB below the frame's spectral peak are treated as noise
# floor and excluded from the moment/rolloff/balance distributions; without
# the gate, window sidelobes drag the moments of narrowband signals.
MOMENT_GATE_DB = 60.0
SPECTROGRAM_RANGE_DB = 80.0


def next_pow2(n: int) -> int:
    return 1 << (n - 1).bit_length()


@dataclass(frozen=True)
class Spectrum:
    """Magnitude spectrum of one windowed frame over rfft bins."""

    frequencies: np.ndarray
    magnitude: np.ndarray
    n_fft: int
    sample_rate: int

    @property
    def magnitude_db(self) -> np.ndarray:
        return 20.0 * np.log10(self.magnitude + LOG_FLOOR)


@dataclass(frozen=True)
class SpectralStats:
    centroid_hz: float
    spread_hz: float
    skewness: float
    kurtosis: float
    slope_db_per_hz: float
    tilt_db_per_octave: float
    balance: float
    decrease: float
    rolloff_hz: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


STAT_NAMES = [f.name for f in fields(SpectralStats)]


def spectrum(frame: np.ndarray, sample_rate: int, n_fft: int | None = None) -> Spectrum:
    """rfft magnitude of an (already windowed) frame, zero-padded to n_fft."""
    x = np.asarray(frame, dtype=np.float64)
    if n_fft is None:
        n_fft = next_pow2(len(x))
    mag = np.abs(np.fft.rfft(x, n=n_fft))
    freqs = np.arange(len(mag)) * sample_rate / n_fft
    return Spectrum(freqs, mag, n_fft, sample_rate)


def _lstsq_slope(x: np.ndarray, y: np.ndarray) -> float:
    x = x - np.mean(x)
    denom = float(np.dot(x, x))
    if denom == 0:
        return 0.0
    return float(np.dot(x, y - np.mean(y)) / denom)


def spectral_stats(spec: Spectrum) -> SpectralStats:
    """Summary statistics of one magnitude spectrum.

    Moments, rolloff, and balance treat the gated power spectrum over the
    positive-frequency bins as a distribution; slope/tilt regress on the dB
    magnitude; decrease uses the classic linear-magnitude formula.
    """
    mag = spec.magnitude
    freqs = spec.frequencies
    power = mag * mag
    pos = freqs > 0
    p_raw = power[pos]
    f = freqs[pos]
    if p_raw.size == 0 or np.max(p_raw) <= 0:
        raise DegenerateFrameError("spectrum carries no positive-frequency energy")
    p = p_raw.copy()
    p[p < np.max(p) * 10.0 ** (-MOMENT_GATE_DB / 10.0)] = 0.0

    total = float(np.sum(p))
    w = p / total
    centroid = float(np.sum(f * w))
    var = float(np.sum((f - centroid) ** 2 * w))
    spread = float(np.sqrt(var))
    if spread > 0:
        z = (f - centroid) / spread
        skewness = float(np.sum(z**3 * w))
        kurtosis = float(np.sum(z**4 * w))
    else:
        skewness = 0.0
        kurtosis = 0.0

    cum = np.cumsum(p)
    rolloff = float(f[int(np.searchsorted(cum, ROLLOFF_FRACTION * total))])

    # balance uses the raw (ungated) band energies; the floor keeps it finite
    below = float(np.sum(p_raw[f <= BALANCE_SPLIT_HZ]))
    above = float(np.sum(p_raw[f > BALANCE_SPLIT_HZ]))
    balance = above / max(below, float(np.sum(p_raw)) * 1e-12)

    db = spec.magnitude_db
    slope = _lstsq_slope(freqs, db)
    tilt_band = freqs >= TILT_MIN_HZ
    tilt = _lstsq_slope(np.log2(freqs[tilt_band]), db[tilt_band])

    # spectral decrease over linear magnitude, bins indexed from 1
    m = mag
    k = np.arange(2, len(m) + 1)
    tail = m[1:]
    denom = float(np.sum(tail))
    decrease = float(np.sum((tail - m[0]) / (k - 1)) / denom) if denom > 0 else 0.0

    return SpectralStats(centroid, spread, skewness, kurtosis, slope, tilt, balance, decrease, rolloff)


@dataclass(frozen=True)
class Spectrogram:
    values_db: np.ndarray  # (n_bins, n_frames), clamped to [max - 80 dB, max]
    frequencies: np.ndarray
    frame_times: np.ndarray
    n_fft: int
    sample_rate: int

    def to_csv(self) -> str:
        """Numeric CSV, one row per frequency bin."""
        lines = [",".join(f"{v:.3f}" for v in row) for row in self.values_db]
        return "\n".join(lines) + "\n"


def spectrogram_from_frames(frames: FrameSequence) -> Spectrogram:
    windowed = frames.windowed()
    n_fft = next_pow2(frames.frame_length)
    mag = np.abs(np.fft.rfft(windowed, n=n_fft, axis=1)).T
    db = 20.0 * np.log10(mag + LOG_FLOOR)
    top = float(np.max(db))
    db = np.clip(db, top - SPECTROGRAM_RANGE_DB, top)
    freqs = np.arange(db.shape[0]) * frames.sample_rate / n_fft
    return Spectrogram(db, freqs, frames.frame_times, n_fft, frames.sample_rate)


def spectrogram(buf: AudioBuffer, frame_ms: float = 25.0, hop_ms: float = 10.0, window: str = "hamming") -> Spectrogram:
    """Time-frequency dB matrix at the standard framing (too-short buffers raise)."""
    return spectrogram_from_frames(frame_signal(buf, frame_ms, hop_ms, window))
