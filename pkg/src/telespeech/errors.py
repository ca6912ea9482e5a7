"""Exception taxonomy shared by every layer of the platform."""


class TelespeechError(Exception):
    """Base class for all errors raised by this package."""


class AudioDecodeError(TelespeechError):
    """WAV container is malformed or truncated."""


class UnsupportedFormatError(TelespeechError):
    """Container parses but the codec/layout is outside PCM16/float32 mono-stereo."""


class EmptyAudioError(TelespeechError):
    """WAV data chunk carries zero samples."""


class ConfigError(TelespeechError):
    """Parameter combination violates a documented precondition."""


class TooShortError(TelespeechError):
    """Signal shorter than the minimum the operation can analyze."""


class DegenerateFrameError(TelespeechError):
    """Frame has no usable signal content (all zero, or spectrum empty)."""


class InsufficientCyclesError(TelespeechError):
    """Fewer glottal cycles than the voice-quality measure needs."""


class EmptySpeechError(TelespeechError):
    """Whole utterance is below the absolute speech floor."""


class EmptyInputError(TelespeechError):
    """A sequence operation received an empty contour."""


class NoVowelError(TelespeechError):
    """Utterance has no voiced frames to pick a vowel segment from."""


class InsufficientDictionaryError(TelespeechError):
    """Dictionary has no items for a required program stage."""

    def __init__(self, stage: str):
        super().__init__(f"no dictionary items for stage '{stage}'")
        self.stage = stage


class StaleAttemptError(TelespeechError):
    """Attempt references an item that is not the current prompt."""


class InvalidEditError(TelespeechError):
    """Program edit would leave the program in an invalid state."""


class AuthorizationError(TelespeechError):
    """Caller is authenticated but not allowed to touch this resource."""


class NotAuthenticatedError(TelespeechError):
    """Request carries no recognizable bearer identity."""


class UnknownResourceError(TelespeechError):
    """Referenced id does not exist in the store."""
