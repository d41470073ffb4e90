"""
Tests for key = value campaign configuration files.
"""

import pytest

from g2g_sdk.core.config import build_setup, load_setup, parse_config_text, parse_overrides
from g2g_sdk.core.models import ConfigError, IntervalMode
from tests.config import CONFIG_DIR


class TestParseConfigText:
    """Test raw key/value parsing."""

    def test_comments_and_spacing(self):
        values = parse_config_text("# camera\nf_cam = 50\n\nf_dis=60\n")
        assert values == {"f_cam": "50", "f_dis": "60"}

    def test_key_without_value(self):
        with pytest.raises(ConfigError, match="f_cam"):
            parse_config_text("f_cam\n")


class TestBuildSetup:
    """Test typed, validated setups."""

    def test_milliseconds_become_seconds(self):
        setup = build_setup({"t_proc": "17.1", "t_min": "2", "interval_base_s": "400"})
        assert setup.pipeline.t_proc == pytest.approx(0.0171)
        assert setup.pipeline.t_min == pytest.approx(0.002)
        assert setup.campaign.interval_base_s == pytest.approx(0.4)

    def test_exposure_follows_frame_period(self):
        setup = build_setup({"f_cam": "25", "t_min": "20"})
        assert setup.pipeline.exposure_s == pytest.approx(0.04)

    def test_explicit_exposure(self):
        setup = build_setup({"f_cam": "50", "exposure_s": "15", "t_min": "5"})
        assert setup.pipeline.exposure_s == pytest.approx(0.015)

    def test_types(self):
        setup = build_setup(
            {"n_measurements": "10", "interval_mode": "CONSTANT", "max_filter_len_k": "14", "led_on_level": "500"}
        )
        assert setup.campaign.n_measurements == 10
        assert setup.campaign.interval_mode is IntervalMode.CONSTANT
        assert setup.campaign.detector.max_filter_len_k == 14
        assert setup.pipeline.led_on_level == 500

    def test_sweep_keys(self):
        setup = build_setup({"sweep_f_cam": "25, 50,300", "sweep_t_min": "19.8,14.1,3.1"})
        assert setup.sweep.f_cam == [25.0, 50.0, 300.0]
        assert setup.sweep.t_min == pytest.approx([0.0198, 0.0141, 0.0031])

    @pytest.mark.parametrize(
        "values,match",
        [
            ({"frame_rate": "50"}, "unknown config keys"),
            ({"f_cam": "fast"}, "f_cam"),
            ({"n_measurements": "2.5"}, "n_measurements"),
            ({"t_proc": "nan"}, "t_proc"),
            ({"interval_mode": "sometimes"}, "interval_mode"),
            ({"sweep_f_cam": "25,50", "sweep_t_min": "1"}, "sweep_t_min"),
            ({"sweep_f_cam": " , "}, "empty list"),
            ({"interval_base_s": "50", "interval_spread_s": "100"}, "overlap"),
            ({"led_on_level": "50"}, "led_on_level"),
            ({"f_cam": "0"}, "f_cam"),
        ],
    )
    def test_errors(self, values, match):
        with pytest.raises(ConfigError, match=match):
            build_setup(values)


def test_overrides_last_wins():
    assert parse_overrides(["seed=1", "f_cam = 60", "seed=2"]) == {"seed": "2", "f_cam": "60"}


def test_override_needs_equals():
    with pytest.raises(ConfigError):
        parse_overrides(["seed"])


def test_load_setup_file_then_overrides(tmp_path):
    path = tmp_path / "campaign.conf"
    path.write_text("f_cam = 50\nseed = 4\nn_measurements = 20\n")
    setup = load_setup(path, {"seed": "9"})
    assert setup.campaign.seed == 9
    assert setup.campaign.n_measurements == 20


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_setup(tmp_path / "absent.conf")


def test_shipped_configs_load():
    ref = load_setup(CONFIG_DIR / "campaign_50hz.conf")
    assert ref.pipeline.t_proc + ref.pipeline.t_min == pytest.approx(0.0191)
    assert ref.campaign.n_measurements == 250
    sweep = load_setup(CONFIG_DIR / "frame_rate_sweep.conf")
    assert sweep.sweep.f_cam == [25.0, 50.0, 300.0]
    assert len(sweep.sweep.t_min) == 3
