"""
Declarative campaign configuration files.

Plain `key = value` text (parsed with python-dotenv). Keys are the field
names of PipelineModel, CampaignConfig and DetectorConfig; time-valued keys
are milliseconds, frequencies Hz, levels integers. Sweeps add
`sweep_f_cam = 25,50,...` and optionally `sweep_t_min = ...` (ms, per rate).
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Union

from dotenv import dotenv_values

from .models import CampaignConfig, ConfigError, DetectorConfig, IntervalMode, PipelineModel

logger = logging.getLogger(__name__)

_MS = 1e-3

PIPELINE_MS_KEYS = frozenset({"exposure_s", "t_min", "t_proc", "proc_jitter_std", "cam_phase", "dis_phase"})
PIPELINE_FLOAT_KEYS = frozenset({"f_cam", "f_dis", "pwm_freq_hz", "noise_std_levels", "rate_hz"})
PIPELINE_INT_KEYS = frozenset({"pwm_depth_levels", "led_on_level", "led_off_level", "resolution_levels"})
CAMPAIGN_MS_KEYS = frozenset({"interval_base_s", "interval_spread_s"})
CAMPAIGN_INT_KEYS = frozenset({"n_measurements", "seed"})
DETECTOR_INT_KEYS = frozenset({"max_filter_len_k", "slope_threshold", "slope_window", "single_step_threshold"})
SWEEP_KEYS = frozenset({"sweep_f_cam", "sweep_t_min"})

KNOWN_KEYS = (
    PIPELINE_MS_KEYS | PIPELINE_FLOAT_KEYS | PIPELINE_INT_KEYS | CAMPAIGN_MS_KEYS
    | CAMPAIGN_INT_KEYS | DETECTOR_INT_KEYS | SWEEP_KEYS | {"interval_mode"}
)


@dataclass
class SweepConfig:
    """Camera frame rates of a sweep, with optional per-rate t_min (seconds)."""
    f_cam: List[float] = field(default_factory=list)
    t_min: Optional[List[float]] = None


@dataclass
class CampaignSetup:
    """Everything a config file describes."""
    pipeline: PipelineModel
    campaign: CampaignConfig
    sweep: SweepConfig


def _number(key: str, value: str, cast: Callable[[str], Union[int, float]]) -> Union[int, float]:
    try:
        parsed = cast(value.strip())
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {value!r}")
    if isinstance(parsed, float) and math.isnan(parsed):
        raise ConfigError(f"{key}: NaN is not a valid value")
    return parsed


def _number_list(key: str, value: str) -> List[float]:
    items = [item for item in value.split(",") if item.strip()]
    if not items:
        raise ConfigError(f"{key}: empty list")
    return [float(_number(key, item, float)) for item in items]


def parse_config_text(text: str) -> Dict[str, str]:
    """key = value pairs of a config file body."""
    values = dotenv_values(stream=io.StringIO(text))
    out = {}
    for key, value in values.items():
        if value is None:
            raise ConfigError(f"{key}: missing value")
        out[key.strip()] = value
    return out


def read_config_file(path: Union[str, Path]) -> Dict[str, str]:
    """Raw key/value pairs of a config file (OSError if unreadable)."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_config_text(text)


def parse_overrides(pairs: List[str]) -> Dict[str, str]:
    """`key=value` command-line overrides, last one wins."""
    out: Dict[str, str] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override must look like key=value, got {pair!r}")
        out[key.strip()] = value.strip()
    return out


def build_setup(values: Mapping[str, str]) -> CampaignSetup:
    """
    Validated pipeline, campaign and sweep settings from raw key/value pairs.

    Raises:
        ConfigError: Unknown key, unparsable value or invariant violation
    """
    unknown = sorted(set(values) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    pipeline_kwargs: Dict[str, Union[int, float]] = {}
    campaign_kwargs: Dict[str, object] = {}
    detector_kwargs: Dict[str, int] = {}
    sweep = SweepConfig()

    for key, raw in values.items():
        if key in PIPELINE_MS_KEYS:
            pipeline_kwargs[key] = _number(key, raw, float) * _MS
        elif key in PIPELINE_FLOAT_KEYS:
            pipeline_kwargs[key] = _number(key, raw, float)
        elif key in PIPELINE_INT_KEYS:
            pipeline_kwargs[key] = _number(key, raw, int)
        elif key in CAMPAIGN_MS_KEYS:
            campaign_kwargs[key] = _number(key, raw, float) * _MS
        elif key in CAMPAIGN_INT_KEYS:
            campaign_kwargs[key] = _number(key, raw, int)
        elif key in DETECTOR_INT_KEYS:
            detector_kwargs[key] = _number(key, raw, int)
        elif key == "interval_mode":
            try:
                campaign_kwargs[key] = IntervalMode(raw.strip().lower())
            except ValueError:
                raise ConfigError(f"interval_mode must be 'constant' or 'random', got {raw!r}")
        elif key == "sweep_f_cam":
            sweep.f_cam = _number_list(key, raw)
        elif key == "sweep_t_min":
            sweep.t_min = [v * _MS for v in _number_list(key, raw)]

    # the measured system exposes for the whole frame period
    if "exposure_s" not in pipeline_kwargs:
        f_cam = float(pipeline_kwargs.get("f_cam", PipelineModel.f_cam))
        if f_cam > 0 and math.isfinite(f_cam):
            pipeline_kwargs["exposure_s"] = 1.0 / f_cam
    if sweep.t_min is not None and len(sweep.t_min) != len(sweep.f_cam):
        raise ConfigError(
            f"sweep_t_min has {len(sweep.t_min)} entries but sweep_f_cam has {len(sweep.f_cam)}"
        )

    try:
        pipeline = PipelineModel(**pipeline_kwargs)
        campaign = CampaignConfig(detector=DetectorConfig(**detector_kwargs), **campaign_kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
    logger.debug(f"Config: {pipeline} / {campaign}")
    return CampaignSetup(pipeline=pipeline, campaign=campaign, sweep=sweep)


def load_setup(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, str]] = None,
) -> CampaignSetup:
    """Config file (optional) plus overrides; overrides win."""
    values: Dict[str, str] = dict(read_config_file(path)) if path else {}
    if overrides:
        values.update(overrides)
    return build_setup(values)
