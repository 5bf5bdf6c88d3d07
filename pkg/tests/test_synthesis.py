import struct
import wave

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geoacoustic.materials import get_material
from geoacoustic.modal import ModalModel
from geoacoustic.synthesis import (
    AudioClip,
    WavFormatError,
    oscillator_params,
    quantize,
    read_wav,
    render_modes,
    sample_count,
    synthesize,
    write_wav,
)

UNDAMPED = get_material("steel").with_(alpha=0.0, beta=0.0)
DAMPED = get_material("steel").with_(alpha=5.0, beta=1e-7)


def lam_for(hz):
    return (2 * np.pi * hz) ** 2


def peak_hz(x, rate):
    spec = np.abs(np.fft.rfft(x))
    return np.fft.rfftfreq(len(x), 1 / rate)[spec.argmax()]


class TestOscillator:
    def test_undamped(self):
        o = oscillator_params(4.0, 0.0, 0.0)
        assert (o.decay, o.damped_angular_freq, o.amplitude) == (0.0, 2.0, 0.5)
        assert o.underdamped

    def test_damped_values(self):
        # sigma = (5 + 1e-7 * 1e6) / 2 = 2.55, omega_d = sqrt(1e6 - 2.55^2)
        o = oscillator_params(1e6, 5.0, 1e-7)
        assert o.decay == pytest.approx(2.55, rel=1e-15)
        assert o.damped_angular_freq == pytest.approx(np.sqrt(1e6 - 2.55 ** 2), rel=1e-15)
        assert o.damping_ratio == pytest.approx(2.55e-3, rel=1e-12)

    def test_overdamped(self):
        o = oscillator_params(1.0, 4.0, 0.0)
        assert not o.underdamped and o.amplitude == 0.0

    def test_invalid(self):
        with pytest.raises(ValueError):
            oscillator_params(0.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            oscillator_params(1.0, -1.0, 0.0)


class TestRender:
    def test_sample_count(self):
        assert sample_count(1.0, 32000) == 32000
        assert sample_count(0.5, 44100) == 22050
        with pytest.raises(ValueError):
            sample_count(0.0, 32000)

    def test_440_peak(self):
        clip = synthesize([lam_for(440)], UNDAMPED)
        assert len(clip) == 32000 and clip.duration == 1.0
        assert peak_hz(clip.samples, 32000) == 440.0
        assert np.abs(clip.samples).max() == pytest.approx(0.9, rel=1e-15)

    def test_two_modes(self):
        x = synthesize([lam_for(440), lam_for(660)], UNDAMPED).samples
        spec = np.abs(np.fft.rfft(x))
        top = sorted(np.argsort(spec)[-2:].tolist())
        assert top == [440, 660]

    def test_nyquist_exclusion(self):
        raw, tally = render_modes([lam_for(440), lam_for(20000)], 0.0, 0.0)
        assert tally == {"modes": 2, "audible": 1, "overdamped": 0, "above_nyquist": 1}
        one, _ = render_modes([lam_for(440)], 0.0, 0.0)
        np.testing.assert_array_equal(raw, one)

    def test_envelope_slope(self):
        lam = lam_for(440)
        sigma = oscillator_params(lam, DAMPED.alpha, DAMPED.beta).decay
        raw, _ = render_modes([lam], DAMPED.alpha, DAMPED.beta, 1.0, 32000)
        # per-cycle peak magnitudes trace exp(-sigma t)
        cyc = 32000 * 10 // 440
        frames = raw[: (len(raw) // cyc) * cyc].reshape(-1, cyc)
        t = (np.arange(len(frames)) * cyc + np.abs(frames).argmax(axis=1)) / 32000
        slope = np.polyfit(t, np.log(np.abs(frames).max(axis=1)), 1)[0]
        assert abs(slope / -sigma - 1) < 0.01

    def test_linear_superposition(self):
        a, _ = render_modes([lam_for(300)], 5.0, 1e-7)
        b, _ = render_modes([lam_for(700)], 5.0, 1e-7)
        ab, _ = render_modes([lam_for(300), lam_for(700)], 5.0, 1e-7)
        assert np.abs(ab - (a + b)).max() <= 1e-12

    def test_amplitude_scales_with_inverse_omega(self):
        # doubling the frequency halves the impulse amplitude
        a, _ = render_modes([lam_for(500)], 0.0, 0.0)
        b, _ = render_modes([lam_for(1000)], 0.0, 0.0)
        assert np.abs(a).max() / np.abs(b).max() == pytest.approx(2.0, rel=1e-4)

    def test_deterministic(self):
        lam = lam_for(np.array([220.0, 555.5, 1234.0, 7000.0]))
        a = synthesize(lam, DAMPED).samples
        b = synthesize(lam[::-1], DAMPED).samples
        assert a.tobytes() == b.tobytes()

    def test_silent(self):
        clip = synthesize([lam_for(20000)], UNDAMPED)
        assert clip.silent and not clip.samples.any()

    def test_unconverged_rejected(self):
        m = ModalModel(np.array([lam_for(440)]), rigid_count=6, converged=False, residuals=np.array([1.0]))
        with pytest.raises(ValueError):
            synthesize(m, UNDAMPED)

    def test_gain_recorded(self):
        raw, _ = render_modes([lam_for(440)], 0.0, 0.0)
        clip = synthesize([lam_for(440)], UNDAMPED)
        np.testing.assert_allclose(clip.samples / clip.normalization_gain, raw, rtol=1e-12, atol=1e-18)


class TestWav:
    def test_header_and_size(self, tmp_path):
        p = write_wav(synthesize([lam_for(440)], DAMPED), tmp_path / "a.wav")
        data = p.read_bytes()
        assert len(data) == 44 + 2 * 32000
        assert data[:4] == b"RIFF" and data[8:16] == b"WAVEfmt "
        fmt, channels, rate, byte_rate, align, bits = struct.unpack("<HHIIHH", data[20:36])
        assert (fmt, channels, rate, byte_rate, align, bits) == (1, 1, 32000, 64000, 2, 16)

    def test_round_trip_one_lsb(self, tmp_path):
        clip = synthesize([lam_for(440), lam_for(1900)], DAMPED)
        back = read_wav(write_wav(clip, tmp_path / "a.wav"))
        assert back.sample_rate == 32000
        assert np.abs(back.samples - clip.samples).max() <= 1 / 32767

    def test_byte_identical(self, tmp_path):
        lam = [lam_for(440), lam_for(1900)]
        a = write_wav(synthesize(lam, DAMPED), tmp_path / "a.wav").read_bytes()
        b = write_wav(synthesize(lam, DAMPED), tmp_path / "b.wav").read_bytes()
        assert a == b

    def test_all_zero(self, tmp_path):
        back = read_wav(write_wav(AudioClip(np.zeros(100)), tmp_path / "z.wav"))
        assert not back.samples.any() and len(back) == 100

    def test_stereo_rejected(self, tmp_path):
        p = tmp_path / "s.wav"
        with wave.open(str(p), "wb") as w:
            w.setnchannels(2)
            w.setsampwidth(2)
            w.setframerate(8000)
            w.writeframes(b"\0" * 40)
        with pytest.raises(WavFormatError):
            read_wav(p)

    def test_truncated_rejected(self, tmp_path):
        p = write_wav(AudioClip(np.full(1000, 0.5)), tmp_path / "t.wav")
        p.write_bytes(p.read_bytes()[:500])
        with pytest.raises(WavFormatError):
            read_wav(p)

    def test_not_a_wav(self, tmp_path):
        p = tmp_path / "x.wav"
        p.write_bytes(b"hello")
        with pytest.raises(WavFormatError):
            read_wav(p)

    def test_quantize_examples(self):
        q = quantize(np.array([0.0, 1.0, -1.0, 0.5 / 32767, -0.5 / 32767, 1.5 / 32767]))
        assert q.tolist() == [0, 32767, -32767, 1, -1, 2]

    def test_clip_range_enforced(self):
        with pytest.raises(ValueError):
            AudioClip(np.array([1.5]))

    @given(arrays(float, st.integers(1, 200), elements=st.floats(-1, 1)))
    def test_quantize_error_half_lsb(self, x):
        q = quantize(x)
        assert np.abs(q / 32767 - x).max() <= 0.5 / 32767 + 1e-15
        np.testing.assert_array_equal(quantize(-x), -q)
