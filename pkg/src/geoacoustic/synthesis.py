"""Rayleigh-damped modal impulse synthesis and 16-bit PCM WAV I/O.

With mass-normalized modes and damping ``C = alpha M + beta K`` every mode is
an independent oscillator ``q'' + 2 sigma q' + lambda q = f`` with
``sigma = (alpha + beta lambda) / 2``.  Its unit-impulse response is
``exp(-sigma t) sin(omega_d t) / omega_d`` with ``omega_d = sqrt(lambda - sigma^2)``.
"""
from __future__ import annotations

import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .materials import MaterialSpec

PCM_SCALE = 32767


class WavFormatError(ValueError):
    """Unsupported or malformed WAVE file."""


@dataclass(frozen=True)
class ModalOscillator:
    eigenvalue: float
    amplitude: float
    decay: float
    damped_angular_freq: float
    underdamped: bool

    @property
    def damped_frequency_hz(self) -> float:
        return self.damped_angular_freq / (2 * np.pi)

    @property
    def damping_ratio(self) -> float:
        return self.decay / np.sqrt(self.eigenvalue)


def oscillator_params(lam: float, alpha: float, beta: float) -> ModalOscillator:
    """Decay, damped frequency and impulse amplitude of one mode.

    Overdamped modes (``sigma^2 >= lambda``) come back silenced: amplitude and
    frequency zero, ``underdamped`` false.
    """
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"eigenvalue must be positive, got {lam}")
    if alpha < 0 or beta < 0:
        raise ValueError("damping coefficients must be non-negative")
    sigma = 0.5 * (alpha + beta * lam)
    disc = lam - sigma * sigma
    if disc <= 0:
        return ModalOscillator(lam, 0.0, sigma, 0.0, False)
    wd = float(np.sqrt(disc))
    return ModalOscillator(lam, 1.0 / wd, sigma, wd, True)


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono clip with samples in [-1, 1].

    ``normalization_gain`` is the factor that was applied to the raw modal
    sum, so ``samples / normalization_gain`` restores absolute amplitude.
    """

    samples: np.ndarray
    sample_rate: int = 32000
    normalization_gain: float = 1.0
    silent: bool = False
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float).ravel()
        if s.size and np.abs(s).max() > 1.0:
            raise ValueError("samples exceed unit range")
        object.__setattr__(self, "samples", s)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


def sample_count(duration: float, rate: int) -> int:
    if not duration > 0:
        raise ValueError("duration must be positive")
    return int(round(rate * duration))


def render_modes(eigenvalues, alpha: float, beta: float, duration: float = 1.0,
                 rate: int = 32000) -> tuple[np.ndarray, dict]:
    """Raw (unnormalized) modal sum and a tally of the modes kept and dropped.

    Modes are summed in ascending eigenvalue order, one row per mode, so the
    result depends only on the inputs.
    """
    lam = np.sort(np.asarray(eigenvalues, dtype=float).ravel())
    n = sample_count(duration, rate)
    t = np.arange(n) / rate
    oscs = [oscillator_params(x, alpha, beta) for x in lam]
    nyquist = 0.5 * rate
    keep = [o for o in oscs if o.underdamped and o.damped_frequency_hz < nyquist]
    tally = {
        "modes": len(oscs),
        "audible": len(keep),
        "overdamped": sum(not o.underdamped for o in oscs),
        "above_nyquist": sum(o.underdamped and o.damped_frequency_hz >= nyquist for o in oscs),
    }
    if not keep:
        return np.zeros(n), tally
    amp = np.array([o.amplitude for o in keep])[:, None]
    dec = np.array([o.decay for o in keep])[:, None]
    wd = np.array([o.damped_angular_freq for o in keep])[:, None]
    rows = amp * np.exp(-dec * t) * np.sin(wd * t)
    out = np.zeros(n)
    for r in rows:
        out += r
    return out, tally


def synthesize(modal, material: MaterialSpec, duration: float = 1.0, rate: int = 32000,
               peak: float = 0.9) -> AudioClip:
    """Impulse response of all audible modes, peak-normalized to ``peak``.

    ``modal`` is a ModalModel or a plain sequence of eigenvalues.  With no
    audible mode left the result is an all-zero clip flagged ``silent``.
    """
    if not 0 < peak <= 1:
        raise ValueError("peak must lie in (0, 1]")
    if hasattr(modal, "eigenvalues"):
        if not getattr(modal, "converged", True):
            raise ValueError("modal model did not converge")
        lam = modal.eigenvalues
    else:
        lam = modal
    raw, tally = render_modes(lam, material.alpha, material.beta, duration, rate)
    top = float(np.abs(raw).max()) if raw.size else 0.0
    info = dict(tally, alpha=material.alpha, beta=material.beta, peak=peak)
    if tally["audible"] == 0 or top == 0.0:
        return AudioClip(np.zeros_like(raw), rate, 1.0, True, info)
    gain = peak / top
    return AudioClip(raw * gain, rate, gain, False, info)


def quantize(samples: np.ndarray) -> np.ndarray:
    """``x * 32767`` rounded half away from zero, as int16."""
    x = np.asarray(samples, dtype=float) * PCM_SCALE
    q = np.sign(x) * np.floor(np.abs(x) + 0.5)
    return np.clip(q, -PCM_SCALE, PCM_SCALE).astype("<i2")


def write_wav(clip: AudioClip, path) -> Path:
    """Mono 16-bit little-endian PCM RIFF/WAVE."""
    path = Path(path)
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(clip.sample_rate))
        w.writeframes(quantize(clip.samples).tobytes())
    return path


def read_wav(path) -> AudioClip:
    """Read a mono 16-bit PCM file back into unit-range samples."""
    try:
        with wave.open(str(path), "rb") as w:
            if w.getnchannels() != 1:
                raise WavFormatError(f"{w.getnchannels()} channels; only mono is supported")
            if w.getsampwidth() != 2:
                raise WavFormatError(f"{8 * w.getsampwidth()}-bit samples; only 16-bit is supported")
            rate = w.getframerate()
            n = w.getnframes()
            data = w.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"{path}: {exc}") from None
    if len(data) != 2 * n:
        raise WavFormatError(f"{path}: data chunk truncated ({len(data)} of {2 * n} bytes)")
    q = np.frombuffer(data, dtype="<i2").astype(float)
    return AudioClip(np.clip(q / PCM_SCALE, -1.0, 1.0), rate)
