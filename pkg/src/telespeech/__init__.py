"""Remote speech-therapy practice platform.

Layers: pure acoustic analysis (``telespeech.analysis``), utterance
comparison (``telespeech.comparison``), the prompt sequencer
(``telespeech.program``), and the durable HTTP service plus patient CLI.
"""

from .analysis import AnalysisConfig, UtteranceFeatures, extract_features
from .audio import AudioBuffer, decode_wav, encode_wav, resample
from .comparison import (
    ComparisonProfile,
    ComparisonReport,
    FeedbackMessage,
    compare_utterances,
    dtw_align,
    make_feedback,
    pitch_discontinuities,
    vowel_segment,
)
from .program import ProgramState, TherapyProgram, WordItem, build_program, next_prompt, record_attempt

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "UtteranceFeatures",
    "extract_features",
    "AudioBuffer",
    "decode_wav",
    "encode_wav",
    "resample",
    "ComparisonProfile",
    "ComparisonReport",
    "FeedbackMessage",
    "compare_utterances",
    "dtw_align",
    "make_feedback",
    "pitch_discontinuities",
    "vowel_segment",
    "ProgramState",
    "TherapyProgram",
    "WordItem",
    "build_program",
    "next_prompt",
    "record_attempt",
    "__version__",
]
