import os

import pytest
import yaml

from nvramsey import acceptance, cli
from nvramsey import config as cfgmod


@pytest.fixture
def fast_cfg(tmp_path):
    """Reference defaults with a short noise record so CLI runs stay quick."""
    cfg = cfgmod.load_config()
    cfg["scenario"]["duration"] = 10.0
    cfg["phantom"]["scan_points"] = 5
    path = tmp_path / "fast.yaml"
    path.write_text(yaml.safe_dump(cfg))
    return str(path)


class TestConfig:
    def test_default_loads_and_validates(self):
        cfg = cfgmod.load_config()
        assert cfgmod.ensemble_params(cfg).photocurrent == pytest.approx(5e-3)
        assert cfgmod.sequence_config(cfg).tau == pytest.approx(3.957e-6)

    def test_unknown_key_rejected(self):
        with pytest.raises(cfgmod.ConfigError, match="unknown"):
            cfgmod.validate({"ensemble": {"photocurrent": 1.0, "typo_key": 2.0}})
        with pytest.raises(cfgmod.ConfigError, match="unknown"):
            cfgmod.validate({"not_a_section": {}})

    def test_hash_stable_under_key_order(self):
        a = {"seed": 1, "out_dir": "x"}
        b = {"out_dir": "x", "seed": 1}
        assert cfgmod.config_hash(a) == cfgmod.config_hash(b)


class TestCli:
    def test_odmr_writes_csv(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["odmr", "--out", str(out)]) == 0
        text = (out / "odmr_spectrum.csv").read_text()
        assert text.startswith("# nvramsey")
        assert "config_hash" in text

    def test_malformed_config_exits_1_no_partial_files(self, tmp_path):
        bad = tmp_path / "bad.yaml"
        bad.write_text("nonsense_section: {a: 1}\n")
        out = tmp_path / "out"
        assert cli.main(["odmr", "--config", str(bad), "--out", str(out)]) == 1
        assert not out.exists() or not any(out.iterdir())

    def test_ramsey_fit_outputs(self, tmp_path):
        out = tmp_path / "out"
        assert cli.main(["ramsey", "--out", str(out)]) == 0
        fit = (out / "ramsey_fit.csv").read_text().splitlines()
        assert fit[-2].startswith("sq,")
        assert fit[-1].startswith("dq,")
        sq_t2 = float(fit[-2].split(",")[1])
        dq_t2 = float(fit[-1].split(",")[1])
        assert sq_t2 == pytest.approx(5.5e-6, rel=0.005)
        assert dq_t2 == pytest.approx(4.4e-6, rel=0.005)

    def test_sensitivity_reproducible(self, tmp_path, fast_cfg):
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert cli.main(["sensitivity", "--config", fast_cfg, "--out", str(out)]) == 0
            outs.append((out / "asd_sensitive.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_seed_override_changes_output(self, tmp_path, fast_cfg):
        out1, out2 = tmp_path / "s1", tmp_path / "s2"
        cli.main(["sensitivity", "--config", fast_cfg, "--out", str(out1), "--seed", "1"])
        cli.main(["sensitivity", "--config", fast_cfg, "--out", str(out2), "--seed", "2"])
        assert (out1 / "asd_sensitive.csv").read_bytes() != (out2 / "asd_sensitive.csv").read_bytes()

    def test_phantom_outputs(self, tmp_path, fast_cfg):
        out = tmp_path / "out"
        assert cli.main(["phantom", "--config", fast_cfg, "--out", str(out)]) == 0
        for fname in ("phantom_map.csv", "phantom_timeseries.csv",
                      "phantom_filtered.csv", "filter_gain.csv"):
            assert (out / fname).exists()

    def test_accept_exit_codes(self, tmp_path, monkeypatch):
        def fake_run_all(cfg, passing=True):
            m = acceptance.Metric("demo", 1.0, "", 1.0 if passing else 2.0, 0.01, "rel")
            return acceptance.RunReport("demo", "hash", (m,), 0.0)

        monkeypatch.setattr(acceptance, "run_all", lambda cfg: fake_run_all(cfg, True))
        out = tmp_path / "ok"
        assert cli.main(["accept", "--out", str(out)]) == 0
        assert (out / "acceptance_report.csv").exists()

        monkeypatch.setattr(acceptance, "run_all", lambda cfg: fake_run_all(cfg, False))
        assert cli.main(["accept", "--out", str(tmp_path / "bad")]) == 2

    def test_atomic_write_leaves_no_temp_files(self, tmp_path):
        out = tmp_path / "out"
        cli.main(["odmr", "--out", str(out)])
        assert not [f for f in os.listdir(out) if f.endswith(".tmp")]
