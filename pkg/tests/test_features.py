"""Whole-utterance feature extraction: composition and invariances."""

import numpy as np
import pytest

from telespeech.analysis import extract_features
from telespeech.audio import AudioBuffer
from telespeech.errors import ConfigError, EmptySpeechError, TooShortError
from telespeech.synth import concat, formant_vowel, silence, tone


def test_stationary_tone_profile():
    f = extract_features(tone(220.0, 1.0))
    assert f.duration_s == pytest.approx(1.0, abs=0.05)
    assert f.jitter == pytest.approx(0.0, abs=0.02)
    assert f.shimmer == pytest.approx(0.0, abs=0.02)
    assert f.summary["mean_f0_hz"] == pytest.approx(220.0, abs=2.0)
    assert f.n_frames == 98
    # every contour aligned to the frame count
    assert len(f.rms) == f.n_frames
    assert len(f.pitch.f0) == f.n_frames
    assert len(f.formant_tracks) == f.n_frames
    assert all(len(v) == f.n_frames for v in f.spectral_frames.values())
    assert f.spectrogram.values_db.shape[1] == f.n_frames


def test_padded_tone_duration():
    buf = concat([silence(0.35), tone(220.0, 0.3), silence(0.35)])
    f = extract_features(buf)
    assert f.duration_s == pytest.approx(0.3, abs=0.05)


def test_synthetic_vowel_mean_f1():
    f = extract_features(formant_vowel([700.0, 1220.0], [80.0, 90.0]))
    assert abs(f.summary["mean_f1_hz"] - 700.0) / 700.0 <= 0.10


def test_silent_input_is_empty_speech():
    with pytest.raises(EmptySpeechError):
        extract_features(silence(0.5))


def test_too_short_input():
    with pytest.raises(TooShortError):
        extract_features(tone(220.0, 0.1))


def test_rate_mismatch_is_config_error():
    with pytest.raises(ConfigError):
        extract_features(tone(220.0, 0.5, sample_rate=8000))


def test_determinism_bit_identical():
    buf = formant_vowel([600.0, 1500.0], [90.0, 100.0])
    a = extract_features(buf)
    b = extract_features(AudioBuffer(buf.samples.copy(), buf.sample_rate))
    assert np.array_equal(a.rms, b.rms)
    assert np.array_equal(a.pitch.f0[a.pitch.voiced], b.pitch.f0[b.pitch.voiced])
    assert a.jitter == b.jitter and a.shimmer == b.shimmer
    assert np.array_equal(a.spectrogram.values_db, b.spectrogram.values_db)
    assert a.to_dict() == b.to_dict()


def test_amplitude_scaling_invariance():
    buf = formant_vowel([700.0, 1220.0], [80.0, 90.0])
    a = extract_features(buf)
    for c in (0.5, 0.1, 0.01):
        b = extract_features(AudioBuffer(buf.samples * c, buf.sample_rate))
        assert np.array_equal(a.pitch.voiced, b.pitch.voiced)
        v = a.pitch.voiced
        assert np.allclose(a.pitch.f0[v], b.pitch.f0[v], rtol=1e-6)
        assert b.jitter == pytest.approx(a.jitter, rel=1e-6)
        assert b.shimmer == pytest.approx(a.shimmer, rel=1e-6)
        # energy scales linearly; dB shifts by 20 log10 c
        assert np.allclose(b.rms, c * a.rms, rtol=1e-9, atol=1e-12)
        active = a.rms >= a.rms.max() * 1e-2
        assert np.allclose(
            b.rms_db[active] - a.rms_db[active], 20 * np.log10(c), atol=1e-3
        )
        for name in ("centroid_hz", "spread_hz", "rolloff_hz", "balance"):
            av, bv = a.spectral_frames[name], b.spectral_frames[name]
            ok = np.isfinite(av) & np.isfinite(bv)
            assert np.allclose(av[ok], bv[ok], rtol=1e-6)


def test_time_shift_by_whole_hops():
    buf = formant_vowel([700.0, 1220.0], [80.0, 90.0], duration_s=0.6)
    a = extract_features(buf)
    k = 7
    shifted = AudioBuffer(np.concatenate([np.zeros(k * 160), buf.samples]), 16000)
    b = extract_features(shifted)
    assert b.n_frames == a.n_frames + k
    assert np.allclose(b.rms[k:], a.rms, atol=1e-12)
    assert np.array_equal(b.pitch.voiced[k:], a.pitch.voiced)
    va = a.pitch.voiced
    assert np.allclose(b.pitch.f0[k:][va], a.pitch.f0[va], rtol=1e-9)


def test_json_round_trip_preserves_comparison_inputs():
    from telespeech.analysis import UtteranceFeatures

    a = extract_features(formant_vowel([650.0, 1400.0], [85.0, 95.0]))
    doc = a.to_dict()
    b = UtteranceFeatures.from_dict(doc)
    assert b.n_frames == a.n_frames
    assert np.array_equal(b.pitch.voiced, a.pitch.voiced)
    assert np.allclose(b.pitch.f0[a.pitch.voiced], a.pitch.f0[a.pitch.voiced], atol=1e-5)
    assert b.jitter == pytest.approx(a.jitter, abs=1e-9)
    assert b.duration_s == pytest.approx(a.duration_s, abs=1e-6)
    assert b.summary["mean_f1_hz"] == pytest.approx(a.summary["mean_f1_hz"], rel=1e-6)
    assert np.allclose(b.spectrogram.values_db, a.spectrogram.values_db, atol=2e-3)
    import json

    json.dumps(doc)  # JSON-safe end to end
