"""Short-time framing and frame-energy contours."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..audio import AudioBuffer
from ..errors import ConfigError, TooShortError

LOG_FLOOR = 1e-10

DEFAULT_FRAME_MS = 25.0
DEFAULT_HOP_MS = 10.0
DEFAULT_WINDOW = "hamming"

_WINDOWS = {
    "hamming": np.hamming,
    "hann": np.hanning,
    "rect": np.ones,
}


@dataclass(frozen=True)
class FrameSequence:
    """Raw (un-tapered) frames; the taper is applied lazily where needed."""

    frames: np.ndarray  # (n_frames, frame_length)
    sample_rate: int
    frame_length: int
    hop_length: int
    window: str = DEFAULT_WINDOW

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_times(self) -> np.ndarray:
        """Start time of each frame in seconds."""
        return np.arange(self.n_frames) * self.hop_length / self.sample_rate

    @property
    def frame_duration(self) -> float:
        return self.frame_length / self.sample_rate

    @property
    def hop_duration(self) -> float:
        return self.hop_length / self.sample_rate

    @cached_property
    def window_values(self) -> np.ndarray:
        try:
            return _WINDOWS[self.window](self.frame_length)
        except KeyError:
            raise ConfigError(f"unknown window '{self.window}'") from None

    def windowed(self) -> np.ndarray:
        return self.frames * self.window_values


def frame_signal(
    buf: AudioBuffer,
    frame_ms: float = DEFAULT_FRAME_MS,
    hop_ms: float = DEFAULT_HOP_MS,
    window: str = DEFAULT_WINDOW,
) -> FrameSequence:
    """Slice a buffer into overlapping frames.

    Frame k starts at sample ``k * hop_length``; the tail shorter than one
    frame is dropped (never zero-padded) so time-shift invariance is exact.
    """
    if not (frame_ms >= hop_ms > 0):
        raise ConfigError(f"need frame_ms >= hop_ms > 0, got {frame_ms}/{hop_ms}")
    frame_length = int(round(buf.sample_rate * frame_ms / 1000.0))
    hop_length = int(round(buf.sample_rate * hop_ms / 1000.0))
    x = np.asarray(buf.samples, dtype=np.float64)
    if len(x) < frame_length:
        raise TooShortError(f"buffer of {len(x)} samples shorter than one {frame_length}-sample frame")
    n_frames = (len(x) - frame_length) // hop_length + 1
    view = np.lib.stride_tricks.sliding_window_view(x, frame_length)[:: hop_length]
    frames = np.array(view[:n_frames], dtype=np.float64)
    if window not in _WINDOWS:
        raise ConfigError(f"unknown window '{window}'")
    return FrameSequence(frames, buf.sample_rate, frame_length, hop_length, window)


def energy_contour(frames: FrameSequence) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame RMS of the raw samples, linear and in dB (floored at 1e-10)."""
    if frames.n_frames == 0:
        raise ConfigError("empty frame sequence")
    rms = np.sqrt(np.mean(frames.frames**2, axis=1))
    db = 20.0 * np.log10(rms + LOG_FLOOR)
    return rms, db
