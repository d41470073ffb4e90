"""
Tests for the g2g command-line interface.
"""

import csv
import io
import json
import sys

import pytest

from g2g_sdk import cli
from g2g_sdk.core import simulator
from g2g_sdk.core.config import load_setup
from g2g_sdk.core.device_io import read_records_csv
from tests.config import CONFIG_DIR

CAMPAIGN_CONF = str(CONFIG_DIR / "campaign_50hz.conf")
SWEEP_CONF = str(CONFIG_DIR / "frame_rate_sweep.conf")


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestSimulate:
    """g2g simulate."""

    def test_reference_campaign(self, tmp_path, capsys):
        code, out, _ = _run(capsys, "simulate", "--config", CAMPAIGN_CONF, "--out", str(tmp_path))
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["n"] == 250
        assert report["width_ms"] < 36.7
        assert report["theory"]["width_ms"] == 36.667
        assert report["theory"]["min_ms"] == 19.1
        assert report["min_ms"] >= 19.1
        assert "G2G delay report (n = 250)" in out
        assert len(read_records_csv((tmp_path / "records.csv").read_text())) == 250

    def test_single_record(self, tmp_path, capsys):
        code, _, _ = _run(
            capsys, "simulate", "--config", CAMPAIGN_CONF, "--set", "n_measurements=1", "--out", str(tmp_path)
        )
        assert code == 0
        assert len((tmp_path / "records.csv").read_text().splitlines()) == 2
        assert not (tmp_path / "report.json").exists()

    def test_fixed_seed_is_byte_identical(self, tmp_path, capsys):
        args = ["simulate", "--config", CAMPAIGN_CONF, "--set", "n_measurements=40", "--seed", "12"]
        assert _run(capsys, *args, "--out", str(tmp_path / "a"))[0] == 0
        assert _run(capsys, *args, "--out", str(tmp_path / "b"))[0] == 0
        for name in ("records.csv", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_seed_flag_changes_campaign(self, tmp_path, capsys):
        base = ["simulate", "--config", CAMPAIGN_CONF, "--set", "n_measurements=20"]
        _run(capsys, *base, "--seed", "1", "--out", str(tmp_path / "a"))
        _run(capsys, *base, "--seed", "2", "--out", str(tmp_path / "b"))
        assert (tmp_path / "a" / "records.csv").read_text() != (tmp_path / "b" / "records.csv").read_text()

    def test_json_format(self, tmp_path, capsys):
        code, out, _ = _run(
            capsys, "simulate", "--set", "n_measurements=10", "--format", "json", "--out", str(tmp_path)
        )
        assert code == 0
        assert json.loads(out) == json.loads((tmp_path / "report.json").read_text())

    def test_bad_config_exits_2(self, tmp_path, capsys):
        code, _, err = _run(capsys, "simulate", "--set", "f_cam=-5", "--out", str(tmp_path))
        assert code == 2
        assert err.startswith("error: ")

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        code, _, err = _run(capsys, "simulate", "--set", "fcam=50", "--out", str(tmp_path))
        assert code == 2
        assert "unknown config keys" in err

    def test_missing_config_exits_3(self, tmp_path, capsys):
        code, _, err = _run(capsys, "simulate", "--config", str(tmp_path / "nope.conf"), "--out", str(tmp_path))
        assert code == 3
        assert err.startswith("error: ")

    def test_unwritable_out_exits_3(self, tmp_path, capsys):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, _ = _run(capsys, "simulate", "--set", "n_measurements=3", "--out", str(blocker / "sub"))
        assert code == 3


def test_analyze_reproduces_simulate_report(tmp_path, capsys):
    sim_dir = tmp_path / "sim"
    args = ["--config", CAMPAIGN_CONF, "--set", "n_measurements=60"]
    assert _run(capsys, "simulate", *args, "--out", str(sim_dir))[0] == 0
    analyzed = tmp_path / "analyzed.json"
    code, _, _ = _run(capsys, "analyze", str(sim_dir / "records.csv"), *args, "--out", str(analyzed))
    assert code == 0
    assert analyzed.read_bytes() == (sim_dir / "report.json").read_bytes()


def test_analyze_without_theory(tmp_path, capsys):
    records = tmp_path / "records.csv"
    records.write_text("led_on_ms,true_delay_ms,measured_delay_ms\n100,,10\n700,,20\n1300,,\n")
    report_file = tmp_path / "report.json"
    code, _, _ = _run(capsys, "analyze", str(records), "--out", str(report_file))
    assert code == 0
    report = json.loads(report_file.read_text())
    assert report["n"] == 2
    assert report["mean_ms"] == 15.0
    assert report["theory"] is None


def test_analyze_schema_error_exits_2(tmp_path, capsys):
    records = tmp_path / "records.csv"
    records.write_text("led_on_ms,measured_delay_ms\n1,2\n")
    code, _, err = _run(capsys, "analyze", str(records))
    assert code == 2
    assert "true_delay_ms" in err


@pytest.mark.parametrize("width", ["0", "-1"])
def test_analyze_rejects_bin_width_before_writing(tmp_path, capsys, width):
    records = tmp_path / "records.csv"
    records.write_text("led_on_ms,true_delay_ms,measured_delay_ms\n100,,10\n700,,20\n")
    report_file = tmp_path / "report.json"
    code, _, err = _run(capsys, "analyze", str(records), "--bin-width-ms", width, "--out", str(report_file))
    assert code == 2
    assert "bin width" in err
    assert not report_file.exists()


def test_analyze_histogram_on_stderr(tmp_path, capsys):
    records = tmp_path / "records.csv"
    records.write_text("led_on_ms,true_delay_ms,measured_delay_ms\n100,,10\n700,,20\n1300,,21\n")
    code, _, err = _run(
        capsys, "analyze", str(records), "--bin-width-ms", "5", "--out", str(tmp_path / "report.json")
    )
    assert code == 0
    assert "[   10.0,    15.0) ms  1" in err
    assert "[   20.0,    25.0) ms  2" in err


class TestSweep:
    """g2g sweep."""

    def test_rates_in_input_order(self, tmp_path, capsys):
        code, out, _ = _run(
            capsys,
            "sweep",
            "--config", SWEEP_CONF,
            "--set", "n_measurements=40",
            "--rates", "300,25,50",
            "--t-min-ms", "3.1,19.8,14.1",
            "--out", str(tmp_path),
        )
        assert code == 0
        with open(tmp_path / "sweep.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [row["rate_hz"] for row in rows] == ["300", "25", "50"]
        assert float(rows[1]["min_ms"]) >= 24.8
        assert float(rows[0]["max_ms"]) < float(rows[2]["max_ms"]) < float(rows[1]["max_ms"])
        lines = out.splitlines()
        assert [line.split()[0] for line in lines[1:]] == ["300", "25", "50"]
        assert (tmp_path / "records_25hz.csv").exists()

    def test_config_rates(self, tmp_path, capsys):
        code, _, _ = _run(
            capsys, "sweep", "--config", SWEEP_CONF, "--set", "n_measurements=20", "--out", str(tmp_path)
        )
        assert code == 0
        with open(tmp_path / "sweep.csv", newline="") as fh:
            assert [row["rate_hz"] for row in csv.DictReader(fh)] == ["25", "50", "300"]

    def test_jobs_and_rates_forwarded(self, tmp_path, capsys, mocker):
        fake = mocker.patch.object(simulator, "run_sweep", return_value=[[], []])
        code, _, _ = _run(capsys, "sweep", "--rates", "25,50", "--jobs", "7", "--out", str(tmp_path))
        assert code == 0
        args, kwargs = fake.call_args
        assert args[2] == [25.0, 50.0]
        assert args[3] is None
        assert kwargs["concurrency"] == 7

    def test_single_measurement_writes_records_only(self, tmp_path, capsys):
        code, _, _ = _run(capsys, "sweep", "--rates", "25,50", "--set", "n_measurements=1", "--out", str(tmp_path))
        assert code == 0
        assert len(read_records_csv((tmp_path / "records_25hz.csv").read_text())) == 1
        assert len(read_records_csv((tmp_path / "records_50hz.csv").read_text())) == 1
        assert not (tmp_path / "sweep.csv").exists()

    def test_empty_rate_list_exits_2(self, tmp_path, capsys):
        code, _, err = _run(capsys, "sweep", "--set", "n_measurements=5", "--out", str(tmp_path))
        assert code == 2
        assert "empty rate list" in err

    def test_t_min_count_mismatch_exits_2(self, tmp_path, capsys):
        code, _, _ = _run(
            capsys, "sweep", "--rates", "25,50", "--t-min-ms", "20", "--out", str(tmp_path)
        )
        assert code == 2


class TestIngest:
    """g2g ingest."""

    def _recorded(self, tmp_path, capsys):
        stream_file = tmp_path / "device.txt"
        code, _, _ = _run(
            capsys,
            "simulate",
            "--config", CAMPAIGN_CONF,
            "--set", "n_measurements=15",
            "--out", str(tmp_path / "sim"),
            "--record-stream", str(stream_file),
        )
        assert code == 0
        setup = load_setup(CAMPAIGN_CONF, {"n_measurements": "15"})
        _, _, truth = simulator.render_campaign(setup.pipeline, setup.campaign)
        return stream_file, truth

    def test_file_round_trip(self, tmp_path, capsys):
        stream_file, truth = self._recorded(tmp_path, capsys)
        out_csv = tmp_path / "ingested.csv"
        code, _, _ = _run(capsys, "ingest", str(stream_file), "--out", str(out_csv))
        assert code == 0
        records = read_records_csv(out_csv.read_text())
        assert len(records) == 15
        for got, want in zip(records, truth):
            assert abs(got.measured_delay_s - want.true_delay_s) <= 0.00075

    def test_stdin(self, tmp_path, capsys, monkeypatch):
        stream_file, _ = self._recorded(tmp_path, capsys)
        monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(stream_file.read_bytes())))
        code, out, _ = _run(capsys, "ingest", "-")
        assert code == 0
        assert len(read_records_csv(out)) == 15

    def test_detector_flags(self, tmp_path, capsys):
        stream_file, _ = self._recorded(tmp_path, capsys)
        code, out, _ = _run(capsys, "ingest", str(stream_file), "--slope-threshold", "5000", "--single-step-threshold", "5000")
        assert code == 0
        assert all(not r.detected for r in read_records_csv(out))

    def test_jittered_recording_matches_records(self, tmp_path, capsys):
        stream_file = tmp_path / "device.txt"
        code, _, _ = _run(
            capsys,
            "simulate",
            "--config", CAMPAIGN_CONF,
            "--set", "n_measurements=20",
            "--set", "proc_jitter_std=2",
            "--out", str(tmp_path / "sim"),
            "--record-stream", str(stream_file),
        )
        assert code == 0
        simulated = read_records_csv((tmp_path / "sim" / "records.csv").read_text())
        out_csv = tmp_path / "ingested.csv"
        assert _run(capsys, "ingest", str(stream_file), "--out", str(out_csv))[0] == 0
        ingested = read_records_csv(out_csv.read_text())
        assert [r.led_on_time_s for r in ingested] == [r.led_on_time_s for r in simulated]
        for got, want in zip(ingested, simulated):
            assert abs(got.measured_delay_s - want.true_delay_s) <= 0.00075

    def test_parse_error_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("S,0,100\n")
        code, _, err = _run(capsys, "ingest", str(bad))
        assert code == 2
        assert "no header" in err


class TestModel:
    """g2g model."""

    def test_reference_width(self, tmp_path, capsys):
        table = tmp_path / "pdf.csv"
        code, out, _ = _run(
            capsys, "model", "--f-cam", "50", "--f-dis", "60", "--t-proc", "17.1", "--t-min", "2", "--out", str(table)
        )
        assert code == 0
        assert "36.67 ms" in out
        with open(table, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 1000
        assert float(rows[0]["t_ms"]) == pytest.approx(19.1)
        assert float(rows[-1]["cdf"]) == pytest.approx(1.0)

    def test_json(self, capsys):
        code, out, _ = _run(capsys, "model", "--f-cam", "25", "--f-dis", "60", "--format", "json")
        assert code == 0
        assert json.loads(out)["width_ms"] == 56.667

    def test_from_config(self, capsys):
        code, out, _ = _run(capsys, "model", "--config", CAMPAIGN_CONF, "--format", "json")
        assert code == 0
        assert json.loads(out)["min_ms"] == 19.1

    def test_text_by_default(self, capsys):
        code, out, _ = _run(capsys, "model", "--f-cam", "50", "--f-dis", "60")
        assert code == 0
        assert out.startswith("Trapezoid model")

    def test_flags_override_config(self, capsys):
        code, out, _ = _run(capsys, "model", "--config", CAMPAIGN_CONF, "--f-cam", "25", "--format", "json")
        assert code == 0
        report = json.loads(out)
        assert report["f_cam"] == 25.0
        assert report["f_dis"] == 60.0
        assert report["min_ms"] == 19.1
        assert report["width_ms"] == 56.667

    def test_delay_flag_overrides_config(self, capsys):
        code, out, _ = _run(
            capsys, "model", "--config", CAMPAIGN_CONF, "--set", "t_min=3", "--t-proc", "10", "--format", "json"
        )
        assert code == 0
        report = json.loads(out)
        assert report["t_proc_ms"] == 10.0
        assert report["t_min_ms"] == 3.0

    def test_needs_rates(self, capsys):
        code, _, err = _run(capsys, "model", "--f-cam", "50")
        assert code == 2
        assert "--f-dis" in err


def test_subcommand_required(capsys):
    with pytest.raises(SystemExit) as exc_info:
        cli.main([])
    assert exc_info.value.code == 2


@pytest.mark.parametrize(
    "argv,expected",
    [
        (["simulate", "--out", "x"], "text"),
        (["model"], "text"),
        (["analyze", "records.csv"], "json"),
    ],
)
def test_format_defaults(argv, expected):
    assert cli.build_parser().parse_args(argv).format == expected
