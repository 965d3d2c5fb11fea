"""Scenario configuration: loading, strict validation, typed accessors."""

from __future__ import annotations

import hashlib
from importlib import resources

import numpy as np
import yaml

from .noise import NoiseModel, Scenario, calibrated_model
from .phantom import PhantomDrive, SensorAperture
from .sequence import SequenceConfig
from .spin_model import BiasField, EnsembleParams


class ConfigError(ValueError):
    pass


# Allowed keys per section; a None leaf means any scalar, a list/dict means
# nested structure. Unknown keys are rejected, never ignored.
_SCHEMA = {
    "ensemble": {
        "photocurrent", "contrast", "t2_star", "stretch_p", "delta_ms",
        "gyromagnetic_ratio", "zero_field_splitting", "hyperfine_a_parallel",
    },
    "bias": {"magnitude"},
    "sequence": {"laser_pulse", "tau", "mw_pulse_total", "lockin_freq"},
    "odmr": {"linewidth", "dip_depth", "span", "points"},
    "ramsey": {"detuning", "sq_t2_star", "dq_t2_star", "max_tau", "points"},
    "noise": {"shot_floor", "band_floor", "alpha", "corner_freq", "harmonics"},
    "scenario": {"duration", "sample_rate"},
    "phantom": {
        "current", "frequency", "dipole_length", "q_direction", "r0_mm",
        "sensor_z_mm", "aperture_mm", "scan_halfspan_mm", "scan_points",
        "quadrature_n", "injected_amplitude", "comparison_distance_mm",
        "sensor_standoff_mm", "comparison_asd", "measured_asd",
    },
    "dsp": {
        "filter_center", "filter_enbw", "filter_order",
        "welch_segment_s", "welch_overlap", "welch_window",
    },
    "seed": None,
    "out_dir": None,
}


def default_config_text() -> str:
    return resources.files("nvramsey.configs").joinpath("reference.yaml").read_text()


def load_config(path=None) -> dict:
    """Load and validate a scenario config; ``None`` loads the bundled reference defaults."""
    text = default_config_text() if path is None else open(path).read()
    data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    validate(data)
    return data


def validate(data: dict):
    for key, value in data.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config section or key: {key!r}")
        allowed = _SCHEMA[key]
        if allowed is None:
            continue
        if not isinstance(value, dict):
            raise ConfigError(f"section {key!r} must be a mapping")
        for sub in value:
            if sub not in allowed:
                raise ConfigError(f"unknown key {key}.{sub!r}")


def config_hash(data: dict) -> str:
    canonical = yaml.safe_dump(data, sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def ensemble_params(cfg: dict) -> EnsembleParams:
    e = cfg["ensemble"]
    return EnsembleParams(
        photocurrent=float(e["photocurrent"]),
        contrast=float(e["contrast"]),
        t2_star=float(e["t2_star"]),
        stretch_p=float(e.get("stretch_p", 1.0)),
        delta_ms=int(e.get("delta_ms", 2)),
        gyromagnetic_ratio=float(e.get("gyromagnetic_ratio", 28e9)),
        zero_field_splitting=float(e.get("zero_field_splitting", 2.870e9)),
        hyperfine_a_parallel=float(e.get("hyperfine_a_parallel", -2.16e6)),
    )


def bias_field(cfg: dict) -> BiasField:
    return BiasField(magnitude=float(cfg["bias"]["magnitude"]))


def sequence_config(cfg: dict) -> SequenceConfig:
    s = cfg["sequence"]
    return SequenceConfig(
        laser_pulse=float(s["laser_pulse"]),
        tau=float(s["tau"]),
        mw_pulse_total=float(s["mw_pulse_total"]),
        lockin_freq=float(s["lockin_freq"]),
    )


def noise_model(cfg: dict) -> NoiseModel:
    n = cfg["noise"]
    return calibrated_model(
        shot_floor=float(n["shot_floor"]),
        band_floor=float(n["band_floor"]),
        alpha=float(n.get("alpha", 1.0)),
        corner_freq=float(n.get("corner_freq", 100.0)),
        line_harmonics=tuple((float(f), float(a)) for f, a in n.get("harmonics", ())),
    )


def base_scenario(cfg: dict, mode: str, injected_signal=None, seed=None) -> Scenario:
    s = cfg["scenario"]
    return Scenario(
        mode=mode,
        duration=float(s["duration"]),
        sample_rate=float(s["sample_rate"]),
        seed=int(cfg.get("seed", 0) if seed is None else seed),
        injected_signal=injected_signal,
    )


def phantom_drive(cfg: dict) -> PhantomDrive:
    p = cfg["phantom"]
    return PhantomDrive(
        current=float(p["current"]),
        frequency=float(p["frequency"]),
        dipole_length=float(p["dipole_length"]),
    )


def phantom_geometry(cfg: dict):
    """(q_direction, r0, nominal aperture) from the phantom section, SI units."""
    p = cfg["phantom"]
    q_dir = np.asarray(p["q_direction"], dtype=float)
    r0 = np.asarray(p["r0_mm"], dtype=float) * 1e-3
    aperture = SensorAperture(
        center=np.array([0.0, 0.0, float(p["sensor_z_mm"]) * 1e-3]),
        sides=tuple(float(s) * 1e-3 for s in p["aperture_mm"]),
    )
    return q_dir, r0, aperture
