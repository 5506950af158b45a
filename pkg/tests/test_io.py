import numpy as np
import pytest

from scopic.errors import DegenerateInputError, SampleParseError
from scopic.io import (
    calibration_scale,
    ingest_samples,
    report_json_bytes,
    write_curve_csv,
)


class TestIngest:
    def test_single_column(self, tmp_path):
        f = tmp_path / "x.txt"
        f.write_text("0.1\n−0.2\n0.05\n")
        arr = ingest_samples(f)
        assert arr.tolist() == [0.1, -0.2, 0.05]

    def test_two_column(self, tmp_path):
        f = tmp_path / "pairs.txt"
        f.write_text("0.1,0.2\n0.3,-0.1\n")
        pa, pb = ingest_samples(f, "two-column")
        assert pa.tolist() == [0.1, 0.3]
        assert pb.tolist() == [0.2, -0.1]

    def test_comments_and_blanks_skipped(self, tmp_path):
        f = tmp_path / "x.txt"
        f.write_text("# header\n1.0\n\n# more\n2.0\n")
        assert ingest_samples(f).tolist() == [1.0, 2.0]

    def test_malformed_row_names_line(self, tmp_path):
        f = tmp_path / "x.txt"
        f.write_text("0.1\n0.2\n0.3\n0.4\n0.5\n0.6\nabc\n")
        with pytest.raises(SampleParseError) as err:
            ingest_samples(f)
        assert err.value.line == 7

    def test_wrong_column_count(self, tmp_path):
        f = tmp_path / "x.txt"
        f.write_text("0.1,0.2\n")
        with pytest.raises(SampleParseError) as err:
            ingest_samples(f, "single-column")
        assert err.value.line == 1

    def test_too_few_records(self, tmp_path):
        f = tmp_path / "x.txt"
        f.write_text("0.1\n")
        with pytest.raises(DegenerateInputError):
            ingest_samples(f)

    def test_non_finite_rejected(self, tmp_path):
        f = tmp_path / "x.txt"
        f.write_text("0.1\nnan\n0.3\n")
        with pytest.raises(SampleParseError):
            ingest_samples(f)


class TestCalibration:
    def test_scale_normalizes_vacuum(self, rng):
        vac = rng.normal(0.0, 3.0, 20_000)
        scale = calibration_scale(vac)
        assert np.var(vac * scale, ddof=1) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            calibration_scale([1.0, 1.0, 1.0])


class TestSerialization:
    def test_report_bytes_deterministic(self):
        payload = {"b": 1.5, "a": [1, 2, 3], "nested": {"z": 0.1, "y": None}}
        assert report_json_bytes(payload) == report_json_bytes(payload)

    def test_curve_csv_round_trip(self, tmp_path):
        path = tmp_path / "c.csv"
        write_curve_csv(path, ["u", "s_max"], [[1.0, 0.5], [1.5, 0.25]])
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "u,s_max"
        assert [float(tok) for tok in lines[1].split(",")] == [1.0, 0.5]
        assert len(lines) == 3
