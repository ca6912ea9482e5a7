"""Frame spectra, spectral statistics, spectrogram."""

import numpy as np
import pytest

from telespeech.analysis.framing import frame_signal
from telespeech.analysis.spectral import Spectrum, spectral_stats, spectrogram, spectrum
from telespeech.errors import DegenerateFrameError, TooShortError
from telespeech.synth import chirp, silence, tone, white_noise

BIN_HZ = 16000 / 512


def test_tone_peak_bin():
    frames = frame_signal(tone(1000.0, 0.5))
    spec = spectrum(frames.windowed()[5], 16000)
    assert spec.n_fft == 512
    assert np.argmax(spec.magnitude) == 32  # 1000 / (16000/512)


def test_dc_frame_energy_in_bin_zero():
    spec = spectrum(np.ones(512), 16000)  # pow2 length: no padding leakage
    assert np.argmax(spec.magnitude) == 0
    assert spec.magnitude[1:].max() <= 1e-9 * spec.magnitude[0]


def test_impulse_flat_magnitude():
    frame = np.zeros(400)
    frame[0] = 1.0
    spec = spectrum(frame, 16000)
    assert np.max(np.abs(spec.magnitude - 1.0)) <= 1e-6


def test_parseval_per_frame():
    frames = frame_signal(white_noise(0.3, seed=11))
    for k in range(frames.n_frames):
        w = frames.windowed()[k]
        spec = spectrum(w, 16000)
        m = spec.magnitude
        e_freq = (m[0] ** 2 + 2 * np.sum(m[1:-1] ** 2) + m[-1] ** 2) / spec.n_fft
        e_time = float(np.sum(w**2))
        assert abs(e_time - e_freq) <= 1e-6 * max(e_time, 1e-12)


def test_single_tone_stats_point_mass():
    frames = frame_signal(tone(1000.0, 0.5))
    stats = spectral_stats(spectrum(frames.windowed()[5], 16000))
    assert abs(stats.centroid_hz - 1000.0) <= BIN_HZ
    assert stats.spread_hz <= BIN_HZ
    assert abs(stats.rolloff_hz - 1000.0) <= BIN_HZ


def test_flat_spectrum_balance():
    freqs = np.arange(257) * BIN_HZ
    stats = spectral_stats(Spectrum(freqs, np.ones(257), 512, 16000))
    assert stats.balance == pytest.approx(7.0, abs=0.1)


def test_white_noise_mean_centroid():
    # oracle: brute-force mean over >= 100 generated frames
    frames = frame_signal(white_noise(1.5, seed=7))
    assert frames.n_frames >= 100
    windowed = frames.windowed()
    centroids = [spectral_stats(spectrum(windowed[k], 16000)).centroid_hz for k in range(frames.n_frames)]
    assert abs(float(np.mean(centroids)) - 4000.0) <= 200.0


def test_all_zero_spectrum_degenerate():
    with pytest.raises(DegenerateFrameError):
        spectral_stats(Spectrum(np.arange(257) * BIN_HZ, np.zeros(257), 512, 16000))


def test_stats_invariants_on_noise():
    frames = frame_signal(white_noise(0.4, seed=2))
    windowed = frames.windowed()
    for k in range(frames.n_frames):
        st = spectral_stats(spectrum(windowed[k], 16000))
        assert 0 < st.centroid_hz <= 8000
        assert 0 < st.rolloff_hz <= 8000
        assert st.spread_hz >= 0
        assert st.balance >= 0


def test_scaling_invariance_of_ratio_stats():
    frames = frame_signal(white_noise(0.3, seed=4))
    w = frames.windowed()[5]
    a = spectral_stats(spectrum(w, 16000))
    b = spectral_stats(spectrum(0.125 * w, 16000))
    for name in ("centroid_hz", "spread_hz", "rolloff_hz", "balance"):
        assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-6)


def test_chirp_ridge_monotone():
    # oracle: the construction sweep 200 -> 2000 Hz
    sg = spectrogram(chirp(200.0, 2000.0, 1.0))
    ridge = np.argmax(sg.values_db, axis=0)
    assert np.all(np.diff(ridge) >= 0)


def test_spectrogram_shape_and_clamp():
    sg = spectrogram(tone(440.0, 1.0))
    assert sg.values_db.shape == (257, 98)
    assert float(sg.values_db.max()) - float(sg.values_db.min()) <= 80.0 + 1e-9


def test_silence_spectrogram_uniform_floor():
    sg = spectrogram(silence(0.5))
    assert np.all(sg.values_db == sg.values_db[0, 0])


def test_spectrogram_too_short():
    with pytest.raises(TooShortError):
        spectrogram(silence(0.01))


def test_spectrogram_csv_rows_are_bins():
    sg = spectrogram(tone(440.0, 0.3))
    lines = sg.to_csv().strip().split("\n")
    assert len(lines) == sg.values_db.shape[0]
    assert len(lines[0].split(",")) == sg.values_db.shape[1]
