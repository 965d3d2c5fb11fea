"""Scenario-driven command-line front end.

Subcommands: odmr | ramsey | sensitivity | phantom | accept. Each loads a
config (the bundled reference scenario when --config is omitted), runs the
named experiment, and writes CSV outputs whose headers embed the config hash
and tool version. Exit codes: 0 success / all-pass, 1 usage or config error,
2 acceptance failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from . import __version__, acceptance, dsp, noise, phantom, sequence, spin_model
from . import config as cfgmod
from .config import ConfigError


def _header(cfg, extra=()):
    return [f"nvramsey {__version__}", f"config_hash: {cfgmod.config_hash(cfg)}", *extra]


def _atomic(path, writer):
    """Write via temp file + rename so failed runs leave no partial files."""
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv_rows(path, header_lines, columns, rows):
    def write(tmp):
        with open(tmp, "w") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            f.write(",".join(columns) + "\n")
            for row in rows:
                f.write(",".join(f"{v:.12g}" if isinstance(v, float) else str(v) for v in row) + "\n")

    _atomic(path, write)


def _maybe_plot(enabled, fname, plot_fn):
    if not enabled:
        return
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    plot_fn(ax)
    fig.tight_layout()
    fig.savefig(fname)
    plt.close(fig)
    print(f"wrote {fname}")


def cmd_odmr(cfg, out_dir, plot):
    params = cfgmod.ensemble_params(cfg)
    bias = cfgmod.bias_field(cfg)
    o = cfg["odmr"]
    span, points = float(o["span"]), int(o["points"])
    grid = np.linspace(params.zero_field_splitting - span / 2, params.zero_field_splitting + span / 2, points)
    spec = spin_model.odmr_spectrum(params, bias, float(o["linewidth"]), grid, float(o["dip_depth"]))
    path = os.path.join(out_dir, "odmr_spectrum.csv")
    _write_csv_rows(path, _header(cfg), ["freq_hz", "contrast"], zip(grid.tolist(), spec.tolist()))
    print(f"wrote {path}")
    _maybe_plot(plot, os.path.join(out_dir, "odmr_spectrum.svg"), lambda ax: (
        ax.plot(grid / 1e9, spec), ax.set_xlabel("frequency (GHz)"), ax.set_ylabel("contrast")))
    lines = spin_model.resonance_lines(params, bias)
    print(f"{len(lines)} resonance lines, "
          f"{len({round(f) for _, _, _, f in lines})} distinct frequencies")


def cmd_ramsey(cfg, out_dir, plot):
    r = cfg["ramsey"]
    taus = np.linspace(0.0, float(r["max_tau"]), int(r["points"]))
    results = {}
    rows = []
    for label, t2, dms in (("sq", float(r["sq_t2_star"]), 1), ("dq", float(r["dq_t2_star"]), 2)):
        fringe = spin_model.ramsey_fringe(
            taus,
            spin_model.RamseyFringeParams(
                detuning=float(r["detuning"]), t2_star=t2, contrast=0.01, delta_ms=dms
            ),
        )
        fit = spin_model.fit_ramsey(
            taus, fringe,
            init={"t2_star": 0.8 * t2, "detuning": float(r["detuning"]), "contrast": 0.008},
            delta_ms=dms,
        )
        results[label] = (fringe, fit)
        rows.append((label, fit.t2_star, fit.sigma["t2_star"], fit.detuning, fit.contrast,
                     fit.stretch_p, fit.residual_norm))
        print(f"{label.upper()} fit: T2* = {fit.t2_star * 1e6:.3f} us "
              f"(+/- {fit.sigma['t2_star'] * 1e6:.3f}), residual {fit.residual_norm:.3g}")

    path = os.path.join(out_dir, "ramsey_fringes.csv")
    _write_csv_rows(path, _header(cfg), ["tau_s", "sq_signal", "dq_signal"],
                    zip(taus.tolist(), results["sq"][0].tolist(), results["dq"][0].tolist()))
    print(f"wrote {path}")
    fit_path = os.path.join(out_dir, "ramsey_fit.csv")
    _write_csv_rows(fit_path, _header(cfg),
                    ["basis", "t2_star_s", "t2_star_sigma_s", "detuning_hz", "contrast", "stretch_p", "residual_norm"],
                    rows)
    print(f"wrote {fit_path}")
    _maybe_plot(plot, os.path.join(out_dir, "ramsey_fringes.svg"), lambda ax: (
        ax.plot(taus * 1e6, results["sq"][0], label="SQ"),
        ax.plot(taus * 1e6, results["dq"][0], label="DQ"),
        ax.set_xlabel("tau (us)"), ax.set_ylabel("signal"), ax.legend()))


def cmd_sensitivity(cfg, out_dir, plot):
    params = cfgmod.ensemble_params(cfg)
    seq = cfgmod.sequence_config(cfg)
    slope = spin_model.ramsey_slope(params, seq.tau)
    shot = spin_model.shot_noise_sensitivity(params.photocurrent, slope, params.gyromagnetic_ratio)
    print(f"calculated slope: {slope * 1e12:.1f} pA/Hz")
    print(f"shot-noise limit (calculated slope): {shot * 1e12:.2f} pT/sqrt(Hz)")

    timeline = sequence.build_dq4_sequence(seq)
    tl_path = os.path.join(out_dir, "sequence_timeline.csv")
    _atomic(tl_path, lambda tmp: timeline.to_csv(tmp, _header(cfg)))
    print(f"wrote {tl_path}")

    model = cfgmod.noise_model(cfg)
    seg = int(float(cfg["dsp"]["welch_segment_s"]) * float(cfg["scenario"]["sample_rate"]))
    specs = {}
    for mode in ("insensitive", "sensitive"):
        ts = noise.synthesize(model, cfgmod.base_scenario(cfg, mode))
        spec = dsp.welch_asd(ts, segment_len=seg,
                             overlap=float(cfg["dsp"]["welch_overlap"]),
                             window=cfg["dsp"]["welch_window"])
        specs[mode] = spec
        path = os.path.join(out_dir, f"asd_{mode}.csv")
        _atomic(path, lambda tmp, s=spec: s.to_csv(tmp, _header(cfg)))
        print(f"wrote {path}")
        print(f"{mode} mode 100-400 Hz band median: {spec.band_median(100, 400) * 1e12:.3f} pT/sqrt(Hz)")
    _maybe_plot(plot, os.path.join(out_dir, "asd.svg"), lambda ax: (
        ax.loglog(specs["sensitive"].freqs, specs["sensitive"].asd * 1e12, label="sensitive"),
        ax.loglog(specs["insensitive"].freqs, specs["insensitive"].asd * 1e12, label="insensitive"),
        ax.set_xlabel("frequency (Hz)"), ax.set_ylabel("ASD (pT/sqrt(Hz))"), ax.legend()))


def cmd_phantom(cfg, out_dir, plot):
    p = cfg["phantom"]
    q_dir, r0, aperture = cfgmod.phantom_geometry(cfg)
    drive = cfgmod.phantom_drive(cfg)
    half = float(p["scan_halfspan_mm"]) * 1e-3
    coords = np.linspace(-half, half, int(p["scan_points"]))
    q = drive.moment * q_dir / np.linalg.norm(q_dir)
    fmap = phantom.phantom_map(q, r0, aperture, coords, coords, int(p["quadrature_n"]))
    map_path = os.path.join(out_dir, "phantom_map.csv")
    _atomic(map_path, lambda tmp: phantom.map_to_csv(tmp, coords, coords, fmap, _header(cfg)))
    print(f"wrote {map_path}")
    print(f"map peak |Bz|: {np.max(np.abs(fmap)) * 1e12:.1f} pT")

    model = cfgmod.noise_model(cfg)
    amp = float(p["injected_amplitude"])
    scen = cfgmod.base_scenario(cfg, "sensitive", injected_signal=(drive.frequency, amp, 0.0))
    ts = noise.synthesize(model, scen)
    raw_path = os.path.join(out_dir, "phantom_timeseries.csv")
    _atomic(raw_path, lambda tmp: ts.to_csv(tmp, _header(cfg)))
    print(f"wrote {raw_path}")

    spec = dsp.FilterSpec(center=float(cfg["dsp"]["filter_center"]),
                          enbw=float(cfg["dsp"]["filter_enbw"]),
                          order=int(cfg["dsp"]["filter_order"]))
    filtered, gain = dsp.narrowband_filter(ts, spec)
    filt_path = os.path.join(out_dir, "phantom_filtered.csv")
    _atomic(filt_path, lambda tmp: filtered.to_csv(tmp, _header(cfg)))
    gain_path = os.path.join(out_dir, "filter_gain.csv")
    _atomic(gain_path, lambda tmp: gain.to_csv(tmp, _header(cfg)))
    print(f"wrote {filt_path}")
    print(f"wrote {gain_path}")

    trim = int(2.0 * ts.sample_rate)
    core = noise.TimeSeries(ts.sample_rate, filtered.samples[trim:-trim], unit="T")
    fit = dsp.fit_tone(core, drive.frequency)
    asd_at_f = float(noise.analytic_asd(model, "sensitive")(np.array([drive.frequency]))[0])
    rms = dsp.rms_from_asd(asd_at_f, spec.enbw)
    ratio = dsp.snr(fit.amplitude, rms)
    print(f"fitted amplitude: {fit.amplitude * 1e12:.2f} +/- {fit.amplitude_sigma * 1e12:.2f} pT "
          f"(injected {amp * 1e12:.1f} pT)")
    print(f"predicted RMS noise in ENBW {spec.enbw} Hz: {rms * 1e12:.2f} pT; SNR = {ratio:.2f}")

    att = phantom.geometric_attenuation(float(p["sensor_standoff_mm"]) * 1e-3,
                                        float(p["comparison_distance_mm"]) * 1e-3, amp)
    rms_cmp = dsp.rms_from_asd(float(p["comparison_asd"]), spec.enbw)
    print(f"comparison scenario: {att * 1e12:.2f} pT at "
          f"{p['comparison_distance_mm']} mm, RMS {rms_cmp * 1e12:.2f} pT, "
          f"SNR = {dsp.snr(att, rms_cmp):.2f}")
    _maybe_plot(plot, os.path.join(out_dir, "phantom_map.svg"), lambda ax: (
        ax.imshow(fmap * 1e12, extent=[-half * 1e3, half * 1e3, -half * 1e3, half * 1e3],
                  origin="lower", cmap="RdBu_r"),
        ax.set_xlabel("x (mm)"), ax.set_ylabel("y (mm)")))


def cmd_accept(cfg, out_dir, plot):
    report = acceptance.run_all(cfg)
    for line in report.lines():
        print(line)
    path = os.path.join(out_dir, "acceptance_report.csv")
    rows = [(m.name, m.value, m.unit, m.reference, m.tolerance, m.tol_kind,
             "pass" if m.passed else "fail") for m in report.metrics]
    _write_csv_rows(path, _header(cfg, [f"wall_time_s: {report.wall_time:.1f}"]),
                    ["name", "value", "unit", "reference", "tolerance", "tol_kind", "status"], rows)
    print(f"wrote {path}")
    return 0 if report.all_passed else 2


COMMANDS = {
    "odmr": cmd_odmr,
    "ramsey": cmd_ramsey,
    "sensitivity": cmd_sensitivity,
    "phantom": cmd_phantom,
    "accept": cmd_accept,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nvramsey", description=__doc__)
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="scenario YAML (default: bundled reference scenario)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output directory (default: config out_dir)")
    parser.add_argument("--plot", action="store_true", help="also write SVG plots (needs matplotlib)")
    args = parser.parse_args(argv)

    try:
        cfg = cfgmod.load_config(args.config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg["seed"] = args.seed
    out_dir = args.out or cfg.get("out_dir", "out")
    os.makedirs(out_dir, exist_ok=True)

    try:
        rc = COMMANDS[args.command](cfg, out_dir, args.plot)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
