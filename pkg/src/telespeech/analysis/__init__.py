"""Deterministic acoustic feature extraction over decoded audio buffers."""

from .features import AnalysisConfig, DEFAULT_CONFIG, UtteranceFeatures, extract_features
from .framing import FrameSequence, energy_contour, frame_signal
from .lpc import Formant, default_lpc_order, formants, lpc
from .pitch import CycleRun, PitchContour, pitch_contour, pitch_periods
from .quality import jitter, pooled_jitter, pooled_shimmer, shimmer
from .spectral import SpectralStats, Spectrogram, Spectrum, spectral_stats, spectrogram, spectrum

__all__ = [
    "AnalysisConfig",
    "DEFAULT_CONFIG",
    "UtteranceFeatures",
    "extract_features",
    "FrameSequence",
    "energy_contour",
    "frame_signal",
    "Formant",
    "default_lpc_order",
    "formants",
    "lpc",
    "CycleRun",
    "PitchContour",
    "pitch_contour",
    "pitch_periods",
    "jitter",
    "pooled_jitter",
    "pooled_shimmer",
    "shimmer",
    "SpectralStats",
    "Spectrogram",
    "Spectrum",
    "spectral_stats",
    "spectrogram",
    "spectrum",
]
