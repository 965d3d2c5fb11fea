"""Field-equivalent noise synthesis for the magnetometer signal chain.

Three additive sources: a white shot-noise floor, power-line harmonics, and a
low-frequency excess (flat at its level above the corner, rising as f^-alpha
below it). All levels are double-sided ASD in T/sqrt(Hz); harmonics are peak
amplitudes in T. Synthesis is deterministic: each stochastic source draws from
its own RNG stream derived from the scenario seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .timeseries import TimeSeries

DEFAULT_SHOT_FLOOR = 1.9e-12  # T/sqrt(Hz)
SENSITIVE_BAND_FLOOR = 2.93e-12  # T/sqrt(Hz), 100-400 Hz band average


@dataclass(frozen=True)
class LowFreqExcess:
    """Excess noise flat at level_at_corner above corner_freq, ~f^-alpha below."""

    alpha: float = 1.0
    corner_freq: float = 100.0  # Hz
    level_at_corner: float = 0.0  # T/sqrt(Hz)

    def __post_init__(self):
        if self.corner_freq <= 0:
            raise ValueError("corner_freq must be positive")
        if self.level_at_corner < 0:
            raise ValueError("level_at_corner must be non-negative")

    def asd(self, f):
        f = np.asarray(f, dtype=float)
        out = np.full_like(f, self.level_at_corner)
        below = (f < self.corner_freq) & (f > 0)
        out[below] = self.level_at_corner * (self.corner_freq / f[below]) ** self.alpha
        return out


DEFAULT_HARMONICS = ((50.0, 3.0e-11), (150.0, 1.0e-11), (250.0, 6.0e-12), (350.0, 4.0e-12))


@dataclass(frozen=True)
class NoiseModel:
    """Additive noise budget, field-equivalent."""

    shot_floor: float = DEFAULT_SHOT_FLOOR  # T/sqrt(Hz), double-sided
    line_harmonics: tuple = DEFAULT_HARMONICS  # ((freq_hz, amplitude_T), ...)
    lowfreq_excess: LowFreqExcess = field(default_factory=LowFreqExcess)
    shot_enabled: bool = True
    harmonics_enabled: bool = True
    lowfreq_enabled: bool = True

    def __post_init__(self):
        if self.shot_floor < 0:
            raise ValueError("shot_floor must be non-negative")
        for f, _a in self.line_harmonics:
            if f <= 0:
                raise ValueError("harmonic frequencies must be positive")

    def max_frequency(self) -> float:
        return max((f for f, _ in self.line_harmonics), default=0.0)


def calibrated_model(
    shot_floor=DEFAULT_SHOT_FLOOR,
    band_floor=SENSITIVE_BAND_FLOOR,
    alpha=1.0,
    corner_freq=100.0,
    line_harmonics=DEFAULT_HARMONICS,
) -> NoiseModel:
    """Noise model whose sensitive-mode ASD averages ``band_floor`` above the corner.

    The excess level is set so the quadrature sum of the shot floor and the
    flat excess equals the target band floor.
    """
    if band_floor < shot_floor:
        raise ValueError("band_floor must be at least the shot floor")
    level = float(np.sqrt(band_floor**2 - shot_floor**2))
    return NoiseModel(
        shot_floor=shot_floor,
        line_harmonics=tuple(line_harmonics),
        lowfreq_excess=LowFreqExcess(alpha=alpha, corner_freq=corner_freq, level_at_corner=level),
    )


@dataclass(frozen=True)
class Scenario:
    """One synthesis run: sensing mode, optional injected tone, record shape."""

    mode: str  # "sensitive" or "insensitive"
    duration: float  # s
    sample_rate: float  # Hz
    seed: int = 0
    injected_signal: Optional[tuple] = None  # (freq_hz, amplitude_T, phase_rad)

    def __post_init__(self):
        if self.mode not in ("sensitive", "insensitive"):
            raise ValueError("mode must be 'sensitive' or 'insensitive'")
        if self.duration <= 0 or self.sample_rate <= 0:
            raise ValueError("duration and sample_rate must be positive")
        n = self.duration * self.sample_rate
        if abs(n - round(n)) > 1e-9:
            raise ValueError("duration * sample_rate must be an integer")

    @property
    def n_samples(self) -> int:
        return int(round(self.duration * self.sample_rate))


def analytic_asd(model: NoiseModel, mode: str):
    """Expected double-sided ASD as a function of frequency, T/sqrt(Hz).

    Insensitive mode sees only the shot floor. Sensitive mode adds the
    low-frequency excess in quadrature; power-line harmonics are discrete
    tones, not part of the continuous density.
    """
    if mode not in ("sensitive", "insensitive"):
        raise ValueError("mode must be 'sensitive' or 'insensitive'")

    def asd(f):
        f = np.asarray(f, dtype=float)
        total = np.zeros_like(f)
        if model.shot_enabled:
            total += model.shot_floor**2
        if mode == "sensitive" and model.lowfreq_enabled:
            total += model.lowfreq_excess.asd(f) ** 2
        return np.sqrt(total)

    return asd


def _shaped_noise(rng, n, fs, asd_func):
    """Gaussian noise with the given double-sided target ASD, via rfft shaping."""
    white = rng.standard_normal(n)
    spec = np.fft.rfft(white)
    f = np.fft.rfftfreq(n, d=1.0 / fs)
    # Clamp the DC/near-DC target to the first positive bin to avoid the
    # f^-alpha divergence; the record cannot resolve below 1/duration anyway.
    f_eval = np.maximum(f, f[1] if n > 1 else fs / n)
    gain = asd_func(f_eval) * np.sqrt(fs)
    spec *= gain
    return np.fft.irfft(spec, n=n)


def synthesize(model: NoiseModel, scenario: Scenario) -> TimeSeries:
    """Field-equivalent time series for a scenario; bit-deterministic in the seed.

    White shot noise has per-sample std shot_floor * sqrt(fs) (double-sided
    ASD identity); the low-frequency excess is spectrally shaped Gaussian
    noise; harmonics are fixed-phase sinusoids. The injected tone, when
    present, is added on top without touching the noise RNG streams.
    """
    fs = scenario.sample_rate
    nyq_needed = model.max_frequency() if scenario.mode == "sensitive" else 0.0
    if scenario.injected_signal is not None:
        nyq_needed = max(nyq_needed, scenario.injected_signal[0])
    if fs <= 2.0 * nyq_needed:
        raise ValueError(f"sample rate {fs} Hz violates Nyquist for {nyq_needed} Hz content")

    n = scenario.n_samples
    t = np.arange(n) / fs
    out = np.zeros(n)

    ss = np.random.SeedSequence(scenario.seed)
    shot_ss, excess_ss = ss.spawn(2)

    if model.shot_enabled:
        rng = np.random.default_rng(shot_ss)
        out += model.shot_floor * np.sqrt(fs) * rng.standard_normal(n)

    if scenario.mode == "sensitive":
        if model.lowfreq_enabled and model.lowfreq_excess.level_at_corner > 0:
            rng = np.random.default_rng(excess_ss)
            out += _shaped_noise(rng, n, fs, model.lowfreq_excess.asd)
        if model.harmonics_enabled:
            for k, (f0, amp) in enumerate(model.line_harmonics):
                out += amp * np.sin(2.0 * np.pi * f0 * t + 0.1 * k)

    if scenario.injected_signal is not None:
        f0, amp, phase = scenario.injected_signal
        out += amp * np.sin(2.0 * np.pi * f0 * t + phase)

    return TimeSeries(sample_rate=fs, samples=out, unit="T")


def current_view(series: TimeSeries, responsivity: float) -> TimeSeries:
    """Convert a field-referred series to demodulated photocurrent, A."""
    if responsivity <= 0:
        raise ValueError("responsivity must be positive")
    return TimeSeries(series.sample_rate, series.samples * responsivity, unit="A")


def field_view(series: TimeSeries, responsivity: float) -> TimeSeries:
    """Inverse of current_view."""
    if responsivity <= 0:
        raise ValueError("responsivity must be positive")
    return TimeSeries(series.sample_rate, series.samples / responsivity, unit="T")
