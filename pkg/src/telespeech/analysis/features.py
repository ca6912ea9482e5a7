"""Whole-utterance acoustic profile: contours, voice quality, and summaries.

``extract_features`` is the single entry point the service uses for both
reference recordings and patient uploads. It is a pure function of
(samples, config): identical input bytes produce identical output.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..audio import CANONICAL_RATE, AudioBuffer
from ..errors import ConfigError, DegenerateFrameError, EmptySpeechError, InsufficientCyclesError, TooShortError
from .framing import frame_signal, energy_contour
from .lpc import Formant, default_lpc_order, formants
from .pitch import PitchContour, pitch_contour, pitch_periods
from .quality import pooled_jitter, pooled_shimmer
from .spectral import STAT_NAMES, Spectrogram, spectral_stats, spectrogram_from_frames, spectrum

MIN_UTTERANCE_S = 0.2
# Below this absolute RMS the whole upload is treated as empty (mic left off).
ABSOLUTE_SPEECH_FLOOR = 1e-5


@dataclass(frozen=True)
class AnalysisConfig:
    sample_rate: int = CANONICAL_RATE
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    window: str = "hamming"
    f0_min_hz: float = 100.0
    f0_max_hz: float = 600.0
    voicing_threshold: float = 0.45
    silence_floor_db: float = 40.0
    lpc_order: int | None = None

    def effective_lpc_order(self) -> int:
        return self.lpc_order if self.lpc_order is not None else default_lpc_order(self.sample_rate)

    def fingerprint(self) -> str:
        blob = json.dumps(self.__dict__, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


DEFAULT_CONFIG = AnalysisConfig()


@dataclass
class UtteranceFeatures:
    config: AnalysisConfig
    n_frames: int
    frame_times: np.ndarray
    rms: np.ndarray
    rms_db: np.ndarray
    pitch: PitchContour
    formant_tracks: list[list[Formant]]
    jitter: float | None
    shimmer: float | None
    spectral_frames: dict[str, np.ndarray]  # NaN where the frame was degenerate
    spectral_means: dict[str, float]
    duration_s: float
    active_span: tuple[int, int]  # inclusive frame indices of the speech region
    spectrogram: Spectrogram
    summary: dict[str, float | None] = field(default_factory=dict)

    def to_dict(self) -> dict:
        def arr(a):
            return np.where(np.isfinite(a), np.round(a, 6), None).tolist()

        return {
            "schema_version": 1,
            "sample_rate": self.config.sample_rate,
            "frame_ms": self.config.frame_ms,
            "hop_ms": self.config.hop_ms,
            "config_fingerprint": self.config.fingerprint(),
            "n_frames": self.n_frames,
            "frame_times_s": arr(self.frame_times),
            "duration_s": round(self.duration_s, 6),
            "active_span": list(self.active_span),
            "energy": {"rms": arr(self.rms), "db": arr(self.rms_db)},
            "pitch": {
                "voiced": [bool(v) for v in self.pitch.voiced],
                "f0_hz": arr(self.pitch.f0),
            },
            "formants": [
                [{"frequency_hz": round(fm.frequency_hz, 3), "bandwidth_hz": round(fm.bandwidth_hz, 3)} for fm in track]
                for track in self.formant_tracks
            ],
            "jitter": self.jitter,
            "shimmer": self.shimmer,
            "spectral": {
                "per_frame": {k: arr(v) for k, v in self.spectral_frames.items()},
                "means": self.spectral_means,
            },
            "summary": self.summary,
            "spectrogram": {
                "db": np.round(self.spectrogram.values_db, 3).tolist(),
                "frequencies_hz": self.spectrogram.frequencies.tolist(),
                "frame_times_s": self.spectrogram.frame_times.tolist(),
                "n_fft": self.spectrogram.n_fft,
            },
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "UtteranceFeatures":
        config = AnalysisConfig(
            sample_rate=doc["sample_rate"], frame_ms=doc["frame_ms"], hop_ms=doc["hop_ms"]
        )
        def arr(values):
            return np.array([np.nan if v is None else v for v in values], dtype=np.float64)

        rate = doc["sample_rate"]
        frame_len = int(round(rate * doc["frame_ms"] / 1000.0))
        hop_len = int(round(rate * doc["hop_ms"] / 1000.0))
        frame_times = arr(doc["frame_times_s"])
        pitch = PitchContour(
            voiced=np.array(doc["pitch"]["voiced"], dtype=bool),
            f0=arr(doc["pitch"]["f0_hz"]),
            frame_times=frame_times,
            sample_rate=rate,
            frame_length=frame_len,
            hop_length=hop_len,
        )
        sg = doc["spectrogram"]
        spec = Spectrogram(
            values_db=np.array(sg["db"], dtype=np.float64),
            frequencies=np.array(sg["frequencies_hz"], dtype=np.float64),
            frame_times=np.array(sg["frame_times_s"], dtype=np.float64),
            n_fft=sg["n_fft"],
            sample_rate=rate,
        )
        tracks = [
            [Formant(fm["frequency_hz"], fm["bandwidth_hz"]) for fm in track]
            for track in doc["formants"]
        ]
        return cls(
            config=config,
            n_frames=doc["n_frames"],
            frame_times=frame_times,
            rms=arr(doc["energy"]["rms"]),
            rms_db=arr(doc["energy"]["db"]),
            pitch=pitch,
            formant_tracks=tracks,
            jitter=doc["jitter"],
            shimmer=doc["shimmer"],
            spectral_frames={k: arr(v) for k, v in doc["spectral"]["per_frame"].items()},
            spectral_means=doc["spectral"]["means"],
            duration_s=doc["duration_s"],
            active_span=tuple(doc["active_span"]),
            spectrogram=spec,
            summary=doc["summary"],
        )


def _mean_or_none(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def extract_features(buf: AudioBuffer, config: AnalysisConfig = DEFAULT_CONFIG) -> UtteranceFeatures:
    """Run the full analysis battery over one resampled utterance."""
    if buf.sample_rate != config.sample_rate:
        raise ConfigError(
            f"buffer rate {buf.sample_rate} != configured {config.sample_rate}; resample first"
        )
    if buf.duration < MIN_UTTERANCE_S:
        raise TooShortError(f"utterance of {buf.duration:.3f}s shorter than {MIN_UTTERANCE_S}s")

    frames = frame_signal(buf, config.frame_ms, config.hop_ms, config.window)
    rms, rms_db = energy_contour(frames)
    max_rms = float(np.max(rms))
    if max_rms < ABSOLUTE_SPEECH_FLOOR:
        raise EmptySpeechError("utterance is silent")
    floor = max_rms * 10.0 ** (-config.silence_floor_db / 20.0)
    active = np.nonzero(rms >= floor)[0]
    first, last = int(active[0]), int(active[-1])
    duration = (last - first) * frames.hop_duration + frames.frame_duration

    pitch = pitch_contour(
        frames, config.f0_min_hz, config.f0_max_hz, config.voicing_threshold, config.silence_floor_db
    )
    runs = pitch_periods(buf, pitch)
    try:
        jit = pooled_jitter(runs)
        shim = pooled_shimmer(runs)
    except InsufficientCyclesError:
        jit = None
        shim = None

    windowed = frames.windowed()
    order = config.effective_lpc_order()
    tracks: list[list[Formant]] = []
    for k in range(frames.n_frames):
        if pitch.voiced[k]:
            try:
                tracks.append(formants(windowed[k], config.sample_rate, order))
            except DegenerateFrameError:
                tracks.append([])
        else:
            tracks.append([])

    per_frame: dict[str, np.ndarray] = {name: np.full(frames.n_frames, np.nan) for name in STAT_NAMES}
    for k in range(frames.n_frames):
        try:
            stats = spectral_stats(spectrum(windowed[k], config.sample_rate))
        except DegenerateFrameError:
            continue
        for name, value in stats.as_dict().items():
            per_frame[name][k] = value
    active_mask = rms >= floor
    means = {}
    for name, contour in per_frame.items():
        valid = contour[active_mask & np.isfinite(contour)]
        means[name] = float(np.mean(valid)) if valid.size else None

    f0_values = pitch.f0[pitch.voiced]
    f1 = [t[0].frequency_hz for t in tracks if len(t) >= 1]
    f2 = [t[1].frequency_hz for t in tracks if len(t) >= 2]
    f3 = [t[2].frequency_hz for t in tracks if len(t) >= 3]
    summary = {
        "mean_f0_hz": _mean_or_none(list(f0_values)),
        "mean_f1_hz": _mean_or_none(f1),
        "mean_f2_hz": _mean_or_none(f2),
        "mean_f3_hz": _mean_or_none(f3),
        "jitter": jit,
        "jitter_percent": 100.0 * jit if jit is not None else None,
        "shimmer": shim,
        "duration_s": duration,
        "voiced_fraction": float(np.mean(pitch.voiced)),
    }

    return UtteranceFeatures(
        config=config,
        n_frames=frames.n_frames,
        frame_times=frames.frame_times,
        rms=rms,
        rms_db=rms_db,
        pitch=pitch,
        formant_tracks=tracks,
        jitter=jit,
        shimmer=shim,
        spectral_frames=per_frame,
        spectral_means=means,
        duration_s=duration,
        active_span=(first, last),
        spectrogram=spectrogram_from_frames(frames),
        summary=summary,
    )
