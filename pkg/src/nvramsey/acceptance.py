"""Acceptance suite: every headline number and property check in one report.

Each criterion returns Metric entries with a value, a reference, and a pinned
tolerance; the CLI and the test suite both run these.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import config as cfgmod
from . import dsp, noise, phantom, sequence, spin_model


@dataclass(frozen=True)
class Metric:
    name: str
    value: float
    unit: str
    reference: float
    tolerance: float
    tol_kind: str  # "rel" or "abs"

    @property
    def passed(self) -> bool:
        if self.tol_kind == "rel":
            return abs(self.value - self.reference) <= self.tolerance * abs(self.reference)
        return abs(self.value - self.reference) <= self.tolerance

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        tol = (
            f"±{self.tolerance * 100:g}%"
            if self.tol_kind == "rel"
            else f"±{self.tolerance:g} {self.unit}"
        )
        return f"[{status}] {self.name}: {self.value:.6g} {self.unit} (ref {self.reference:.6g} {tol})"


@dataclass(frozen=True)
class RunReport:
    scenario: str
    input_hash: str
    metrics: tuple
    wall_time: float

    @property
    def all_passed(self) -> bool:
        return all(m.passed for m in self.metrics)

    def lines(self):
        out = [f"scenario: {self.scenario}  config_hash: {self.input_hash}"]
        out += [m.line() for m in self.metrics]
        out.append(
            f"{sum(m.passed for m in self.metrics)}/{len(self.metrics)} criteria passed "
            f"in {self.wall_time:.1f} s"
        )
        return out


def criterion_slope(cfg):
    """Demodulated Ramsey slope with the reference operating parameters."""
    params = cfgmod.ensemble_params(cfg)
    tau = cfgmod.sequence_config(cfg).tau
    value = spin_model.ramsey_slope(params, tau)
    return [Metric("ramsey_slope", value * 1e12, "pA/Hz", 802.0, 0.01, "rel")]


def criterion_shot_limit(cfg):
    """Shot-noise sensitivity from the measured slope."""
    params = cfgmod.ensemble_params(cfg)
    value = spin_model.shot_noise_sensitivity(
        params.photocurrent, 761e-12, params.gyromagnetic_ratio
    )
    return [Metric("shot_noise_limit", value * 1e12, "pT/sqrt(Hz)", 1.9, 0.03, "rel")]


def criterion_slope_consistency(cfg):
    """Numerical slope of the detuning response vs the closed-form slope."""
    params = cfgmod.ensemble_params(cfg)
    seq = cfgmod.sequence_config(cfg)
    h = 1.0  # Hz
    r = sequence.response_curve(params, seq, [-h, h])
    numeric = (r[1] - r[0]) / (2.0 * h)
    analytic = spin_model.ramsey_slope(params, seq.tau)
    return [Metric("response_slope_ratio", numeric / analytic, "", 1.0, 0.01, "rel")]


def criterion_noise_floors(cfg):
    """Synthesized Welch floors in both sensing modes, 100-400 Hz band."""
    model = cfgmod.noise_model(cfg)
    seg = int(float(cfg["dsp"]["welch_segment_s"]) * float(cfg["scenario"]["sample_rate"]))
    out = []
    for mode, ref in (("insensitive", 1.9), ("sensitive", 2.93)):
        scen = cfgmod.base_scenario(cfg, mode)
        ts = noise.synthesize(model, scen)
        spec = dsp.welch_asd(ts, segment_len=seg)
        value = spec.band_median(100.0, 400.0)
        out.append(Metric(f"{mode}_floor_100_400", value * 1e12, "pT/sqrt(Hz)", ref, 0.05, "rel"))
    return out


def criterion_ramsey_roundtrip(cfg):
    """Noiseless fringe fits recover the generating T2* in both bases."""
    r = cfg["ramsey"]
    out = []
    for label, t2, dms in (("sq", float(r["sq_t2_star"]), 1), ("dq", float(r["dq_t2_star"]), 2)):
        taus = np.linspace(0.0, float(r["max_tau"]), int(r["points"]))
        fringe = spin_model.ramsey_fringe(
            taus,
            spin_model.RamseyFringeParams(
                detuning=float(r["detuning"]), t2_star=t2, contrast=0.01, delta_ms=dms
            ),
        )
        fit = spin_model.fit_ramsey(
            taus,
            fringe,
            init={"t2_star": 0.8 * t2, "detuning": 1.05 * float(r["detuning"]), "contrast": 0.008},
            delta_ms=dms,
        )
        out.append(Metric(f"{label}_t2_star", fit.t2_star * 1e6, "us", t2 * 1e6, 0.005, "rel"))
    return out


def _random_scenes(n, seed=12345):
    rng = np.random.default_rng(seed)
    scenes = []
    while len(scenes) < n:
        r0 = rng.uniform(-1, 1, 3)
        r0 *= rng.uniform(1e-3, 8e-3) / np.linalg.norm(r0)
        r = rng.uniform(-1, 1, 3)
        r *= rng.uniform(10e-3, 50e-3) / np.linalg.norm(r)
        scenes.append((r, r0))
    return scenes


def criterion_gradF_oracle(cfg, n_scenes=1000):
    """Analytic grad F vs central finite differences on random scenes."""
    worst = 0.0
    for r, r0 in _random_scenes(n_scenes):
        g = phantom.sarvas_gradF(r, r0)
        h = 1e-6 * np.linalg.norm(r)
        fd = np.empty(3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            fd[k] = (phantom.sarvas_F(r + e, r0) - phantom.sarvas_F(r - e, r0)) / (2 * h)
        worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(g))
    return [Metric("gradF_fd_max_rel_err", worst, "", 0.0, 1e-6, "abs")]


def criterion_sarvas_properties(cfg):
    """Radial-dipole silence, divergence-free field, rotational covariance."""
    out = []
    r0 = np.array([1e-3, 2e-3, 9e-3])
    # Power-of-two scaling keeps Q exactly parallel to r0 in floating point.
    scene = phantom.DipoleScene(q=r0 * 2.0**-20, r0=r0, r=np.array([2e-3, -1e-3, 14e-3]))
    out.append(Metric("radial_dipole_Bnorm", float(np.linalg.norm(phantom.dipole_field(scene))), "T", 0.0, 0.0, "abs"))

    q = np.array([0.0, 35e-9, 0.0])
    r0 = np.array([0.0, 0.0, 9.5e-3])
    worst_div = 0.0
    for r, _ in _random_scenes(50, seed=99):
        h = 1e-7 * np.linalg.norm(r)
        div = 0.0
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            bp = phantom.dipole_field(phantom.DipoleScene(q=q, r0=r0, r=r + e))[k]
            bm = phantom.dipole_field(phantom.DipoleScene(q=q, r0=r0, r=r - e))[k]
            div += (bp - bm) / (2 * h)
        b = np.linalg.norm(phantom.dipole_field(phantom.DipoleScene(q=q, r0=r0, r=r)))
        worst_div = max(worst_div, abs(div) * np.linalg.norm(r) / b)
    out.append(Metric("divergence_rel", worst_div, "", 0.0, 1e-6, "abs"))

    rng = np.random.default_rng(7)
    worst_rot = 0.0
    from scipy.spatial.transform import Rotation

    for _ in range(20):
        rot = Rotation.random(random_state=rng).as_matrix()
        r = np.array([2e-3, 1e-3, 13e-3])
        b = phantom.dipole_field(phantom.DipoleScene(q=q, r0=r0, r=r))
        b_rot = phantom.dipole_field(phantom.DipoleScene(q=rot @ q, r0=rot @ r0, r=rot @ r))
        worst_rot = max(worst_rot, np.linalg.norm(b_rot - rot @ b) / np.linalg.norm(b))
    out.append(Metric("rotational_covariance", worst_rot, "", 0.0, 1e-12, "abs"))
    return out


def criterion_phantom_map(cfg):
    """Peak of the aperture-averaged scan map stays within the stated bound."""
    q_dir, r0, aperture = cfgmod.phantom_geometry(cfg)
    drive = cfgmod.phantom_drive(cfg)
    p = cfg["phantom"]
    half = float(p["scan_halfspan_mm"]) * 1e-3
    coords = np.linspace(-half, half, int(p["scan_points"]))
    q = drive.moment * q_dir / np.linalg.norm(q_dir)
    fmap = phantom.phantom_map(q, r0, aperture, coords, coords, int(p["quadrature_n"]))
    peak = float(np.max(np.abs(fmap)))
    return [Metric("phantom_map_peak", peak * 1e12, "pT", 150.0, 0.2, "rel")]


def criterion_rms_snr(cfg):
    """The RMS-from-ASD and SNR arithmetic of the phantom comparison."""
    p = cfg["phantom"]
    enbw = float(cfg["dsp"]["filter_enbw"])
    amp = float(p["injected_amplitude"]) * 1e12
    rms = dsp.rms_from_asd(float(p["measured_asd"]), enbw) * 1e12
    att = phantom.geometric_attenuation(
        float(p["sensor_standoff_mm"]) * 1e-3,
        float(p["comparison_distance_mm"]) * 1e-3,
        float(p["injected_amplitude"]),
    ) * 1e12
    rms_cmp = dsp.rms_from_asd(float(p["comparison_asd"]), enbw) * 1e12
    return [
        Metric("rms_noise", rms, "pT", 18.1, 0.005, "rel"),
        Metric("snr_ours", dsp.snr(amp, 18.1), "", 4.3, 0.05, "abs"),
        Metric("attenuated_amplitude", att, "pT", 9.6, 0.1, "abs"),
        Metric("rms_noise_comparison", rms_cmp, "pT", 2.5, 0.05, "abs"),
        Metric("snr_comparison", dsp.snr(9.6, 2.5), "", 3.8, 0.05, "abs"),
    ]


def criterion_phantom_recovery(cfg, n_seeds=100, duration=6.0, fs=2000.0, trim=1.5):
    """Injected-tone recovery across seeds, judged against the predicted RMS.

    Predicted sigma is rms_from_asd at the drive frequency with the filter
    ENBW; a seed passes when the fitted amplitude lands within 3 sigma.
    """
    model = cfgmod.noise_model(cfg)
    p = cfg["phantom"]
    f0 = float(p["frequency"])
    amp = float(p["injected_amplitude"])
    spec = dsp.FilterSpec(
        center=float(cfg["dsp"]["filter_center"]),
        enbw=float(cfg["dsp"]["filter_enbw"]),
        order=int(cfg["dsp"]["filter_order"]),
    )
    asd_at_f0 = float(noise.analytic_asd(model, "sensitive")(np.array([f0]))[0])
    sigma_pred = dsp.rms_from_asd(asd_at_f0, spec.enbw)

    n_trim = int(trim * fs)
    hits = 0
    for seed in range(n_seeds):
        scen = noise.Scenario(
            mode="sensitive",
            duration=duration,
            sample_rate=fs,
            seed=seed,
            injected_signal=(f0, amp, 0.3),
        )
        ts = noise.synthesize(model, scen)
        filtered, _ = dsp.narrowband_filter(ts, spec)
        core = type(ts)(fs, filtered.samples[n_trim:-n_trim], unit="T")
        fit = dsp.fit_tone(core, f0)
        if abs(fit.amplitude - amp) <= 3.0 * sigma_pred:
            hits += 1
    return [Metric("phantom_recovery_hits", hits, f"/{n_seeds}", n_seeds, 5.0, "abs")]


def criterion_properties(cfg):
    """Parseval, filter ENBW, white-noise ASD identity, determinism."""
    out = []
    fs = 2000.0
    rng = np.random.default_rng(42)
    from .timeseries import TimeSeries

    # Parseval on 60 s of white noise.
    x = rng.standard_normal(int(60 * fs))
    ts = TimeSeries(fs, x)
    spec = dsp.welch_asd(ts)
    df = spec.freqs[1] - spec.freqs[0]
    power = 2.0 * float(np.sum(spec.asd**2) * df)  # both sidebands
    out.append(Metric("parseval_ratio", power / float(np.var(x)), "", 1.0, 0.02, "rel"))

    # Measured ENBW of the default narrowband filter.
    fspec = dsp.FilterSpec()
    sos = dsp.design_narrowband(fspec, fs)
    measured = dsp._filtfilt_enbw(sos, fspec.center, fs)
    out.append(Metric("filter_enbw", measured, "Hz", fspec.enbw, 0.05, "rel"))

    # White-noise double-sided ASD identity: sigma / sqrt(fs).
    sigma = 3.2e-12
    ts2 = TimeSeries(fs, sigma * np.sqrt(fs) * rng.standard_normal(int(60 * fs)))
    med = dsp.welch_asd(ts2).band_median(50.0, 900.0)
    out.append(Metric("white_asd_identity", med / sigma, "", 1.0, 0.05, "rel"))

    # Determinism: bit-identical resynthesis.
    model = cfgmod.noise_model(cfg)
    scen = cfgmod.base_scenario(cfg, "sensitive", seed=3)
    a = noise.synthesize(model, scen)
    b = noise.synthesize(model, scen)
    out.append(Metric("determinism_identical", float(np.array_equal(a.samples, b.samples)), "", 1.0, 0.0, "abs"))
    return out


CRITERIA = (
    ("1_slope", criterion_slope),
    ("2_shot_limit", criterion_shot_limit),
    ("3_slope_consistency", criterion_slope_consistency),
    ("4_noise_floors", criterion_noise_floors),
    ("5_ramsey_roundtrip", criterion_ramsey_roundtrip),
    ("6_gradF_oracle", criterion_gradF_oracle),
    ("7_sarvas_properties", criterion_sarvas_properties),
    ("8_phantom_map", criterion_phantom_map),
    ("9_rms_snr", criterion_rms_snr),
    ("10_phantom_recovery", criterion_phantom_recovery),
    ("11_property_suites", criterion_properties),
)


def run_all(cfg=None) -> RunReport:
    if cfg is None:
        cfg = cfgmod.load_config()
    start = time.time()
    metrics = []
    for _name, fn in CRITERIA:
        metrics.extend(fn(cfg))
    return RunReport(
        scenario="reference",
        input_hash=cfgmod.config_hash(cfg),
        metrics=tuple(metrics),
        wall_time=time.time() - start,
    )
