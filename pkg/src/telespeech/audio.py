"""WAV decoding/encoding and sample-rate conversion.

The decoder is a small RIFF parser rather than ``wave`` because the error
taxonomy (malformed header vs. unsupported codec vs. empty payload) must be
exact and ``wave`` cannot read IEEE-float files.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy.signal import resample_poly

from .errors import AudioDecodeError, ConfigError, EmptyAudioError, UnsupportedFormatError

MIN_SAMPLE_RATE = 8000
MAX_SAMPLE_RATE = 48000
CANONICAL_RATE = 16000

_FMT_PCM = 1
_FMT_IEEE_FLOAT = 3


@dataclass(frozen=True)
class AudioBuffer:
    """Decoded mono signal: float64 amplitudes in [-1, 1] plus its rate."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)

    def scaled(self, factor: float) -> "AudioBuffer":
        return AudioBuffer(np.clip(self.samples * factor, -1.0, 1.0), self.sample_rate)


def _iter_chunks(raw: bytes):
    offset = 12
    while offset + 8 <= len(raw):
        cid = raw[offset : offset + 4]
        (size,) = struct.unpack_from("<I", raw, offset + 4)
        yield cid, offset + 8, size
        # chunks are word-aligned
        offset += 8 + size + (size & 1)


def decode_wav(raw: bytes) -> AudioBuffer:
    """Decode RIFF/WAVE bytes (PCM16 or float32, 1-2 channels) to a mono buffer.

    Stereo channels are averaged. Amplitudes are normalized to [-1, 1];
    the original sample rate is preserved (resample separately).
    """
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise AudioDecodeError("not a RIFF/WAVE container")

    fmt = None
    data_span = None
    for cid, start, size in _iter_chunks(raw):
        if cid == b"fmt " and fmt is None:
            if size < 16 or start + 16 > len(raw):
                raise AudioDecodeError("fmt chunk truncated")
            fmt = struct.unpack_from("<HHIIHH", raw, start)
        elif cid == b"data" and data_span is None:
            data_span = (start, size)
    if fmt is None or data_span is None:
        raise AudioDecodeError("missing fmt or data chunk")

    audio_format, channels, rate, _byte_rate, block_align, bits = fmt
    if audio_format == _FMT_PCM and bits == 16:
        dtype, width = np.dtype("<i2"), 2
    elif audio_format == _FMT_IEEE_FLOAT and bits == 32:
        dtype, width = np.dtype("<f4"), 4
    else:
        raise UnsupportedFormatError(f"unsupported codec: format={audio_format} bits={bits}")
    if channels not in (1, 2):
        raise UnsupportedFormatError(f"unsupported channel count: {channels}")
    if not (MIN_SAMPLE_RATE <= rate <= MAX_SAMPLE_RATE):
        raise UnsupportedFormatError(f"sample rate {rate} outside {MIN_SAMPLE_RATE}-{MAX_SAMPLE_RATE} Hz")
    frame_size = width * channels
    if block_align not in (0, frame_size):
        raise AudioDecodeError(f"block align {block_align} inconsistent with format")

    start, size = data_span
    if size == 0:
        raise EmptyAudioError("data chunk is empty")
    if start + size > len(raw):
        raise AudioDecodeError("data chunk truncated")
    if size % frame_size != 0:
        raise AudioDecodeError("data chunk ends mid-sample")

    flat = np.frombuffer(raw, dtype=dtype, count=size // width, offset=start)
    if audio_format == _FMT_PCM:
        samples = flat.astype(np.float64) / 32768.0
    else:
        samples = flat.astype(np.float64)
    if channels == 2:
        samples = samples.reshape(-1, 2).mean(axis=1)
    samples = np.clip(samples, -1.0, 1.0)
    return AudioBuffer(samples, int(rate))


def encode_wav(buf: AudioBuffer, bits: str = "pcm16") -> bytes:
    """Serialize a buffer back to a mono WAV byte string."""
    x = np.clip(np.asarray(buf.samples, dtype=np.float64), -1.0, 1.0)
    if bits == "pcm16":
        payload = (x * 32767.0).round().astype("<i2").tobytes()
        audio_format, width = _FMT_PCM, 2
    elif bits == "float32":
        payload = x.astype("<f4").tobytes()
        audio_format, width = _FMT_IEEE_FLOAT, 4
    else:
        raise ConfigError(f"unknown encoding '{bits}'")
    rate = buf.sample_rate
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack("<IHHIIHH", 16, audio_format, 1, rate, rate * width, width, width * 8)
    header += b"data" + struct.pack("<I", len(payload))
    return header + payload


def resample(buf: AudioBuffer, target_rate: int) -> AudioBuffer:
    """Band-limited (windowed-sinc polyphase) resampling to ``target_rate``."""
    if not (MIN_SAMPLE_RATE <= target_rate <= MAX_SAMPLE_RATE):
        raise ConfigError(f"target rate {target_rate} outside {MIN_SAMPLE_RATE}-{MAX_SAMPLE_RATE} Hz")
    if target_rate == buf.sample_rate:
        return buf
    g = math.gcd(target_rate, buf.sample_rate)
    out = resample_poly(buf.samples, target_rate // g, buf.sample_rate // g)
    return AudioBuffer(np.clip(out, -1.0, 1.0), target_rate)
