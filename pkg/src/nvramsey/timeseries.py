"""Uniformly sampled time series and spectra, plus their file formats.

The binary time-series format is columnar little-endian float64 with a small
fixed header: magic ``b"NVTS"``, version uint32, sample rate float64, sample
count uint64, then the samples.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

BINARY_MAGIC = b"NVTS"
BINARY_VERSION = 1
_HEADER = struct.Struct("<4sId Q")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real-valued signal."""

    sample_rate: float
    samples: np.ndarray
    unit: str = "T"

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("samples must be a 1-D array of length >= 2")
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n) / self.sample_rate

    def to_csv(self, path, header_lines=()):
        """Write (time_s, value_<unit>) rows; extra header lines get '#' prefixes."""
        with open(path, "w") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            f.write(f"time_s,value_{self.unit}\n")
            for t, v in zip(self.times, self.samples):
                f.write(f"{t:.9g},{v:.17g}\n")

    def to_binary(self, path):
        with open(path, "wb") as f:
            f.write(_HEADER.pack(BINARY_MAGIC, BINARY_VERSION, self.sample_rate, self.n))
            f.write(self.samples.astype("<f8").tobytes())

    @classmethod
    def from_binary(cls, path, unit="T") -> "TimeSeries":
        with open(path, "rb") as f:
            magic, version, fs, n = _HEADER.unpack(f.read(_HEADER.size))
            if magic != BINARY_MAGIC:
                raise ValueError(f"bad magic {magic!r}, expected {BINARY_MAGIC!r}")
            if version != BINARY_VERSION:
                raise ValueError(f"unsupported version {version}")
            samples = np.frombuffer(f.read(8 * n), dtype="<f8")
        if samples.size != n:
            raise ValueError("truncated file")
        return cls(sample_rate=fs, samples=samples.copy(), unit=unit)


@dataclass(frozen=True)
class Spectrum:
    """Frequency-indexed amplitude spectral density.

    Convention is fixed to double-sided ASD (single-sided / sqrt(2)),
    displayed over non-negative frequencies.
    """

    freqs: np.ndarray
    asd: np.ndarray
    unit: str = "T"
    convention: str = "double-sided"
    window: dict = field(default_factory=dict)

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        asd = np.asarray(self.asd, dtype=float)
        if freqs.shape != asd.shape:
            raise ValueError("freqs and asd must have matching shape")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("freqs must be strictly increasing")
        if np.any(asd < 0):
            raise ValueError("asd must be non-negative")
        if self.convention != "double-sided":
            raise ValueError("only the double-sided convention is supported")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "asd", asd)

    def band_average(self, f_lo: float, f_hi: float) -> float:
        sel = (self.freqs >= f_lo) & (self.freqs <= f_hi)
        if not np.any(sel):
            raise ValueError("band contains no frequency bins")
        return float(np.mean(self.asd[sel]))

    def band_median(self, f_lo: float, f_hi: float) -> float:
        sel = (self.freqs >= f_lo) & (self.freqs <= f_hi)
        if not np.any(sel):
            raise ValueError("band contains no frequency bins")
        return float(np.median(self.asd[sel]))

    def to_csv(self, path, header_lines=()):
        with open(path, "w") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            f.write(f"# convention: {self.convention}\n")
            for k, v in sorted(self.window.items()):
                f.write(f"# window.{k}: {v}\n")
            f.write(f"freq_hz,asd_{self.unit}_per_sqrthz\n")
            for fr, a in zip(self.freqs, self.asd):
                f.write(f"{fr:.9g},{a:.17g}\n")
