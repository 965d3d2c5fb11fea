import numpy as np
import pytest

from nvramsey.timeseries import Spectrum, TimeSeries


class TestTimeSeries:
    def test_invariants(self):
        with pytest.raises(ValueError):
            TimeSeries(0.0, np.zeros(10))
        with pytest.raises(ValueError):
            TimeSeries(100.0, np.zeros(1))

    def test_csv_round_fields(self, tmp_path):
        ts = TimeSeries(100.0, np.array([1e-12, -2e-12, 3e-12]), unit="T")
        path = tmp_path / "ts.csv"
        ts.to_csv(path, header_lines=["hello"])
        lines = path.read_text().splitlines()
        assert lines[0] == "# hello"
        assert lines[1] == "time_s,value_T"
        assert len(lines) == 5

    def test_binary_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        ts = TimeSeries(4000.0, rng.standard_normal(1000) * 1e-12)
        path = tmp_path / "ts.bin"
        ts.to_binary(path)
        back = TimeSeries.from_binary(path)
        assert back.sample_rate == ts.sample_rate
        assert np.array_equal(back.samples, ts.samples)

    def test_binary_bad_magic(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"JUNK" + b"\x00" * 32)
        with pytest.raises(ValueError, match="magic"):
            TimeSeries.from_binary(path)


class TestSpectrum:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Spectrum(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
        with pytest.raises(ValueError):
            Spectrum(np.array([1.0, 2.0]), np.array([-1.0, 0.0]))
        with pytest.raises(ValueError):
            Spectrum(np.array([1.0, 2.0]), np.array([0.0, 0.0]), convention="single-sided")

    def test_band_stats(self):
        s = Spectrum(np.array([1.0, 2.0, 3.0, 4.0]), np.array([1.0, 2.0, 3.0, 10.0]))
        assert s.band_average(1.0, 3.0) == pytest.approx(2.0)
        assert s.band_median(1.0, 4.0) == pytest.approx(2.5)
        with pytest.raises(ValueError):
            s.band_average(100.0, 200.0)

    def test_csv_metadata(self, tmp_path):
        s = Spectrum(np.array([1.0, 2.0]), np.array([3.0, 4.0]), window={"name": "hann"})
        path = tmp_path / "spec.csv"
        s.to_csv(path)
        text = path.read_text()
        assert "# convention: double-sided" in text
        assert "# window.name: hann" in text
        assert "freq_hz,asd_T_per_sqrthz" in text
