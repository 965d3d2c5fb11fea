"""Spectral estimation, lock-in demodulation, narrowband filtering and tone fitting.

All spectra use the double-sided ASD convention (single-sided / sqrt(2)),
displayed over positive frequencies; the RMS noise passed by a filter of
equivalent noise bandwidth b is ASD * sqrt(2 b).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import signal as sps
from scipy.optimize import brentq

from .timeseries import Spectrum, TimeSeries


@dataclass(frozen=True)
class FilterSpec:
    """Narrowband zero-phase bandpass specification."""

    center: float = 77.0  # Hz
    enbw: float = 0.8  # Hz, equivalent noise bandwidth
    order: int = 2  # Butterworth order per band edge
    zero_phase: bool = True

    def __post_init__(self):
        if not 0 < self.enbw < self.center:
            raise ValueError("need 0 < enbw < center")
        if self.order < 2:
            raise ValueError("order must be >= 2")


def welch_asd(ts: TimeSeries, segment_len=None, overlap=0.5, window="hann") -> Spectrum:
    """Welch estimate of the double-sided ASD.

    ``segment_len`` defaults to one second of samples. ``overlap`` is the
    fractional segment overlap.
    """
    if segment_len is None:
        segment_len = int(round(ts.sample_rate))
    if segment_len > ts.n:
        raise ValueError("segment_len exceeds record length")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must lie in [0, 1)")
    noverlap = int(segment_len * overlap)
    freqs, psd_ss = sps.welch(
        ts.samples,
        fs=ts.sample_rate,
        window=window,
        nperseg=segment_len,
        noverlap=noverlap,
        detrend="constant",
        scaling="density",
    )
    win = sps.get_window(window, segment_len)
    enbw_bins = segment_len * np.sum(win**2) / np.sum(win) ** 2
    meta = {
        "name": window,
        "segment_len": segment_len,
        "overlap": overlap,
        "enbw_hz": enbw_bins * ts.sample_rate / segment_len,
    }
    # scipy returns single-sided PSD; double-sided ASD = sqrt(PSD_ss / 2).
    asd = np.sqrt(psd_ss / 2.0)
    keep = freqs > 0
    return Spectrum(freqs=freqs[keep], asd=asd[keep], unit=ts.unit, window=meta)


def lockin_demodulate(raw: TimeSeries, f_ref, phase=0.0, lpf_cutoff=400.0) -> TimeSeries:
    """Square-wave synchronous demodulation with low-pass filtering and decimation."""
    if raw.sample_rate <= 2 * f_ref:
        raise ValueError("sample rate must exceed twice the reference frequency")
    if lpf_cutoff >= f_ref:
        raise ValueError("low-pass cutoff must be below the reference frequency")
    ref = sps.square(2.0 * np.pi * f_ref * raw.times + phase)
    mixed = raw.samples * ref
    sos = sps.butter(4, lpf_cutoff, btype="low", fs=raw.sample_rate, output="sos")
    filtered = sps.sosfiltfilt(sos, mixed)
    decim = max(int(raw.sample_rate // (4.0 * lpf_cutoff)), 1)
    return TimeSeries(sample_rate=raw.sample_rate / decim, samples=filtered[::decim], unit=raw.unit)


def _filtfilt_enbw(sos, center, fs, npts=20001):
    """ENBW of a forward-backward filter from its frequency response."""
    f = np.linspace(0.0, min(10.0 * center, fs / 2.0), npts)
    _, h = sps.sosfreqz(sos, worN=2.0 * np.pi * f / fs)
    gain2 = np.abs(h) ** 4  # filtfilt power gain
    _, h0 = sps.sosfreqz(sos, worN=[2.0 * np.pi * center / fs])
    g0 = np.abs(h0[0]) ** 4
    return np.trapezoid(gain2, f) / g0


@lru_cache(maxsize=32)
def design_narrowband(spec: FilterSpec, fs: float):
    """Butterworth bandpass whose measured zero-phase ENBW equals spec.enbw."""
    if fs <= 2 * spec.center:
        raise ValueError("Nyquist violation: fs must exceed twice the center frequency")

    def make(bw):
        lo, hi = spec.center - bw / 2.0, spec.center + bw / 2.0
        return sps.butter(spec.order, [lo, hi], btype="bandpass", fs=fs, output="sos")

    def err(bw):
        return _filtfilt_enbw(make(bw), spec.center, fs) - spec.enbw

    bw = brentq(err, 0.1 * spec.enbw, 10.0 * spec.enbw, xtol=1e-6 * spec.enbw)
    return make(bw)


def narrowband_filter(ts: TimeSeries, spec: FilterSpec):
    """Zero-phase narrowband filter; returns (filtered series, gain curve Spectrum).

    The gain curve is the amplitude gain of the applied (forward-backward)
    operation, sampled on a linear frequency grid.
    """
    sos = design_narrowband(spec, ts.sample_rate)
    if spec.zero_phase:
        out = sps.sosfiltfilt(sos, ts.samples)
        power = 4
    else:
        out = sps.sosfilt(sos, ts.samples)
        power = 2
    f = np.linspace(ts.sample_rate / ts.n, min(10.0 * spec.center, ts.sample_rate / 2.0), 4096)
    _, h = sps.sosfreqz(sos, worN=2.0 * np.pi * f / ts.sample_rate)
    gain = np.abs(h) ** (power / 2)
    curve = Spectrum(
        freqs=f,
        asd=gain,
        unit="gain",
        window={"name": "butter_bandpass", "order": spec.order, "enbw_hz": spec.enbw},
    )
    return TimeSeries(ts.sample_rate, out, unit=ts.unit), curve


def rms_from_asd(asd_value: float, enbw: float) -> float:
    """RMS noise in a band: double-sided ASD * sqrt(2 * ENBW)."""
    if asd_value <= 0 or enbw <= 0:
        raise ValueError("inputs must be positive")
    return asd_value * np.sqrt(2.0 * enbw)


@dataclass(frozen=True)
class ToneFit:
    amplitude: float
    amplitude_sigma: float
    phase: float
    phase_sigma: float


def fit_tone(ts: TimeSeries, f_known: float) -> ToneFit:
    """Linear least-squares fit of a tone at a known frequency.

    Model: a sin(2 pi f t) + b cos(2 pi f t) + c. Uncertainties come from the
    residual covariance.
    """
    if ts.duration < 5.0 / f_known:
        raise ValueError("record must span at least 5 periods of f_known")
    t = ts.times
    w = 2.0 * np.pi * f_known * t
    basis = np.column_stack([np.sin(w), np.cos(w), np.ones_like(t)])
    coef, _, _, _ = np.linalg.lstsq(basis, ts.samples, rcond=None)
    a, b, _ = coef
    resid = ts.samples - basis @ coef
    dof = max(ts.n - 3, 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(basis.T @ basis)

    amp = float(np.hypot(a, b))
    phase = float(np.arctan2(b, a))
    if amp > 0:
        g_amp = np.array([a / amp, b / amp])
        g_phi = np.array([-b / amp**2, a / amp**2])
        amp_sigma = float(np.sqrt(g_amp @ cov[:2, :2] @ g_amp))
        phase_sigma = float(np.sqrt(g_phi @ cov[:2, :2] @ g_phi))
    else:
        amp_sigma = float(np.sqrt(max(cov[0, 0], cov[1, 1])))
        phase_sigma = float(np.pi)
    return ToneFit(amplitude=amp, amplitude_sigma=amp_sigma, phase=phase, phase_sigma=phase_sigma)


def snr(amplitude: float, rms_noise: float) -> float:
    """Amplitude signal-to-noise ratio."""
    if rms_noise <= 0:
        raise ValueError("rms_noise must be positive")
    return amplitude / rms_noise
