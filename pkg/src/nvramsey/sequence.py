"""DQ 4-Ramsey lock-in sequence: timing layout and demodulated response."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spin_model import EnsembleParams, ramsey_slope

DEFAULT_PHASE_CYCLE = ("XX", "X-X", "-XX", "-X-X")


@dataclass(frozen=True)
class SequenceConfig:
    """Timing of one DQ 4-Ramsey lock-in cycle."""

    laser_pulse: float = 20e-6  # s
    tau: float = 3.957e-6  # s
    mw_pulse_total: float = 1.0e-6  # s, total MW time per Ramsey block
    lockin_freq: float = 20e3  # Hz
    phase_cycle: tuple = DEFAULT_PHASE_CYCLE

    def __post_init__(self):
        if min(self.laser_pulse, self.tau, self.mw_pulse_total) < 0:
            raise ValueError("durations must be non-negative")
        if self.lockin_freq <= 0:
            raise ValueError("lockin_freq must be positive")
        if len(self.phase_cycle) != 4:
            raise ValueError("phase_cycle must have exactly 4 entries")
        budget = 0.5 / self.lockin_freq
        used = self.laser_pulse + self.tau + self.mw_pulse_total
        # small relative tolerance so a fully packed budget is not rejected
        # for rounding in the sum
        if used > budget * (1.0 + 1e-12):
            raise ValueError(
                "timing budget violated: laser_pulse + tau + mw_pulse_total = "
                f"{used * 1e6:.3f} us exceeds the half modulation period "
                f"0.5/lockin_freq = {budget * 1e6:.3f} us"
            )

    @property
    def half_period(self) -> float:
        return 0.5 / self.lockin_freq

    @property
    def slack(self) -> float:
        return max(0.0, self.half_period - self.laser_pulse - self.tau - self.mw_pulse_total)


@dataclass(frozen=True)
class SequenceEvent:
    kind: str  # laser | mw_pulse | free_evolution | readout_window
    start: float  # s
    duration: float  # s
    phase: str = ""
    sign: int = +1


@dataclass(frozen=True)
class SequenceTimeline:
    """Ordered, non-overlapping events of one full 4-Ramsey cycle."""

    events: tuple
    lockin_freq: float

    def __post_init__(self):
        t = 0.0
        for ev in self.events:
            if ev.duration < 0:
                raise ValueError("negative event duration")
            if ev.start < t - 1e-15:
                raise ValueError("overlapping or unordered events")
            t = ev.start + ev.duration
        total = self.events[-1].start + self.events[-1].duration if self.events else 0.0
        if abs(total - 2.0 / self.lockin_freq) > 1e-12:
            raise ValueError("timeline must span exactly 2 / lockin_freq")

    @property
    def total_duration(self) -> float:
        last = self.events[-1]
        return last.start + last.duration

    def blocks(self):
        """Demodulation sign of each Ramsey block, in order."""
        return [ev.sign for ev in self.events if ev.kind == "free_evolution"]

    def to_csv(self, path, header_lines=()):
        with open(path, "w") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            f.write("kind,start_s,duration_s,phase,sign\n")
            for ev in self.events:
                f.write(f"{ev.kind},{ev.start:.12g},{ev.duration:.12g},{ev.phase},{ev.sign:+d}\n")


def build_dq4_sequence(cfg: SequenceConfig) -> SequenceTimeline:
    """Lay out four Ramsey blocks over two lock-in periods.

    Each block fills one half modulation period: laser init/readout pulse, a
    pi/2 MW pulse, free evolution, a second pi/2 pulse, and a readout window
    absorbing the slack. Consecutive blocks alternate demodulation sign.
    """
    events = []
    t = 0.0
    half_mw = cfg.mw_pulse_total / 2.0
    signs = (+1, -1, +1, -1)
    for phase, sign in zip(cfg.phase_cycle, signs):
        events.append(SequenceEvent("laser", t, cfg.laser_pulse, "", sign))
        t += cfg.laser_pulse
        events.append(SequenceEvent("mw_pulse", t, half_mw, phase, sign))
        t += half_mw
        events.append(SequenceEvent("free_evolution", t, cfg.tau, "", sign))
        t += cfg.tau
        events.append(SequenceEvent("mw_pulse", t, half_mw, phase, sign))
        t += half_mw
        events.append(SequenceEvent("readout_window", t, cfg.slack, "", sign))
        t += cfg.slack
    return SequenceTimeline(events=tuple(events), lockin_freq=cfg.lockin_freq)


def response_curve(params: EnsembleParams, cfg: SequenceConfig, detuning_grid):
    """Demodulated photocurrent vs MW detuning, A.

    R(delta) = I * C * exp(-(tau/T2*)^p) * sin(2 pi dms delta tau); odd in
    delta, with slope at zero equal to ramsey_slope.
    """
    grid = np.asarray(detuning_grid, dtype=float)
    if not np.all(np.isfinite(grid)):
        raise ValueError("detuning grid must be finite")
    envelope = (
        params.photocurrent
        * params.contrast
        * np.exp(-((cfg.tau / params.t2_star) ** params.stretch_p))
    )
    return envelope * np.sin(2.0 * np.pi * params.delta_ms * grid * cfg.tau)


def field_responsivity(params: EnsembleParams, cfg: SequenceConfig) -> float:
    """Linear field-to-photocurrent map gamma_e * ramsey_slope, A/T."""
    return params.gyromagnetic_ratio * ramsey_slope(params, cfg.tau)
