"""
Core data models for the G2G SDK.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np


# Type aliases
Seconds = float  # all stored times are seconds; milliseconds only at the presentation layer
Hz = float
Level = int  # quantized brightness level


DEFAULT_RATE_HZ = 2000.0
DEFAULT_RESOLUTION_LEVELS = 1024


class ConfigError(ValueError):
    """Inconsistent pipeline, campaign or detector configuration."""


class IntervalMode(Enum):
    """Inter-measurement interval policy of a campaign."""
    CONSTANT = "constant"
    RANDOM = "random"


class FrameKind(Enum):
    """Line kinds of the device protocol."""
    HEADER = "H"
    SAMPLE = "S"
    EVENT = "E"


@dataclass(eq=False)
class SampleStream:
    """Timestamped brightness samples at a fixed rate; index i is at t0 + i/rate_hz."""
    samples: np.ndarray
    rate_hz: Hz = DEFAULT_RATE_HZ
    resolution_levels: int = DEFAULT_RESOLUTION_LEVELS
    t0: Seconds = 0.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.int64).reshape(-1)
        if not (math.isfinite(self.rate_hz) and self.rate_hz > 0):
            raise ValueError(f"rate_hz must be positive, got {self.rate_hz}")
        if self.resolution_levels < 2:
            raise ValueError(f"resolution_levels must be >= 2, got {self.resolution_levels}")
        if self.samples.size and (
            self.samples.min() < 0 or self.samples.max() > self.resolution_levels - 1
        ):
            raise ValueError(
                f"sample values must lie in [0, {self.resolution_levels - 1}]"
            )

    def __len__(self) -> int:
        return int(self.samples.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleStream):
            return NotImplemented
        return (
            self.rate_hz == other.rate_hz
            and self.resolution_levels == other.resolution_levels
            and self.t0 == other.t0
            and np.array_equal(self.samples, other.samples)
        )

    def __repr__(self) -> str:
        return (
            f"SampleStream(n={len(self)}, rate_hz={self.rate_hz}, "
            f"resolution_levels={self.resolution_levels}, t0={self.t0})"
        )

    @property
    def end_time_s(self) -> Seconds:
        """Time of the last sample."""
        return self.time_of(len(self) - 1)

    def time_of(self, index: int) -> Seconds:
        return self.t0 + index / self.rate_hz

    def index_at_or_after(self, t: Seconds) -> int:
        """First sample index whose time is >= t (may equal len(self))."""
        idx = math.ceil(round((t - self.t0) * self.rate_hz, 9))
        return min(max(idx, 0), len(self))

    def with_samples(self, samples: Union[np.ndarray, Sequence[int]]) -> SampleStream:
        """Same rate, resolution and t0 with new sample values."""
        return SampleStream(
            samples=samples,
            rate_hz=self.rate_hz,
            resolution_levels=self.resolution_levels,
            t0=self.t0,
        )


@dataclass(frozen=True)
class DetectorConfig:
    """Maximum-filter length and slope-threshold parameters of the edge detector."""
    max_filter_len_k: int = 12  # one 180 Hz PWM period at 2 kHz, rounded up
    slope_threshold: int = 20
    slope_window: int = 3  # sample intervals, b_i - b_{i-3}
    single_step_threshold: int = 20

    def __post_init__(self):
        if self.max_filter_len_k < 0:
            raise ConfigError(f"max_filter_len_k must be >= 0, got {self.max_filter_len_k}")
        if self.slope_threshold <= 0:
            raise ConfigError(f"slope_threshold must be > 0, got {self.slope_threshold}")
        if self.slope_window < 1:
            raise ConfigError(f"slope_window must be >= 1, got {self.slope_window}")
        if self.single_step_threshold <= 0:
            raise ConfigError(
                f"single_step_threshold must be > 0, got {self.single_step_threshold}"
            )

    @property
    def settle_samples(self) -> int:
        """First index free of the truncated-window start transient."""
        return self.max_filter_len_k + self.slope_window


@dataclass(frozen=True)
class EdgeDetection:
    """Sample at which the lit LED is declared visible."""
    trigger_index: int
    trigger_time_s: Seconds


@dataclass(frozen=True)
class TrapezoidModel:
    """Analytic G2G delay: shift t_proc + t_min plus U(0, 1/f_cam) plus U(0, 1/f_dis).

    Infinite rates are allowed and describe ideal (zero-width) components.
    """
    t_proc: Seconds
    t_min: Seconds
    f_cam: Hz
    f_dis: Hz

    def __post_init__(self):
        for name in ("t_proc", "t_min"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ConfigError(f"{name} must be finite and >= 0, got {value}")
        for name in ("f_cam", "f_dis"):
            value = getattr(self, name)
            if math.isnan(value) or value <= 0:
                raise ConfigError(f"{name} must be > 0, got {value}")

    @property
    def shift_s(self) -> Seconds:
        return self.t_proc + self.t_min

    @property
    def w_cam(self) -> Seconds:
        return 1.0 / self.f_cam

    @property
    def w_dis(self) -> Seconds:
        return 1.0 / self.f_dis

    @property
    def width_s(self) -> Seconds:
        return self.w_cam + self.w_dis

    @property
    def support(self) -> tuple:
        return (self.shift_s, self.shift_s + self.width_s)


@dataclass(frozen=True)
class PipelineModel:
    """The simulated system under test: camera, processing, display, panel light and sensor."""
    f_cam: Hz = 50.0
    exposure_s: Seconds = 0.020
    t_min: Seconds = 0.002
    t_proc: Seconds = 0.0171
    proc_jitter_std: Seconds = 0.0
    f_dis: Hz = 60.0
    cam_phase: Seconds = 0.0
    dis_phase: Seconds = 0.0
    pwm_freq_hz: Hz = 0.0  # 0 disables backlight PWM
    pwm_depth_levels: Level = 0
    led_on_level: Level = 400
    led_off_level: Level = 100
    noise_std_levels: float = 0.0
    rate_hz: Hz = DEFAULT_RATE_HZ
    resolution_levels: int = DEFAULT_RESOLUTION_LEVELS

    def __post_init__(self):
        if not (self.f_cam > 0 and math.isfinite(self.f_cam)):
            raise ConfigError(f"f_cam must be positive, got {self.f_cam}")
        if not (self.f_dis > 0 and math.isfinite(self.f_dis)):
            raise ConfigError(f"f_dis must be positive, got {self.f_dis}")
        frame_period = 1.0 / self.f_cam
        if not (0 < self.exposure_s <= frame_period * (1 + 1e-9)):
            raise ConfigError(
                f"exposure_s must lie in (0, 1/f_cam = {frame_period}], got {self.exposure_s}"
            )
        # t_min includes the non-exposed tail of the frame period
        if self.t_min < frame_period - self.exposure_s - 1e-12:
            raise ConfigError(
                f"t_min ({self.t_min}) must be >= 1/f_cam - exposure_s ({frame_period - self.exposure_s})"
            )
        if self.t_proc < 0 or self.proc_jitter_std < 0:
            raise ConfigError("t_proc and proc_jitter_std must be >= 0")
        if not 0 <= self.cam_phase < frame_period:
            raise ConfigError(f"cam_phase must lie in [0, {frame_period}), got {self.cam_phase}")
        if not 0 <= self.dis_phase < 1.0 / self.f_dis:
            raise ConfigError(f"dis_phase must lie in [0, {1.0 / self.f_dis}), got {self.dis_phase}")
        if self.pwm_freq_hz < 0 or self.pwm_depth_levels < 0:
            raise ConfigError("pwm_freq_hz and pwm_depth_levels must be >= 0")
        if self.led_on_level <= self.led_off_level:
            raise ConfigError(
                f"led_on_level ({self.led_on_level}) must exceed led_off_level ({self.led_off_level})"
            )
        if self.noise_std_levels < 0:
            raise ConfigError("noise_std_levels must be >= 0")
        if not (self.rate_hz > 0 and math.isfinite(self.rate_hz)):
            raise ConfigError(f"rate_hz must be positive, got {self.rate_hz}")


@dataclass
class MeasurementRecord:
    """One trial: LED-on instant, ground-truth display instant and detector output."""
    led_on_time_s: Seconds
    true_display_time_s: Optional[Seconds] = None  # None for real-device records
    detected_time_s: Optional[Seconds] = None  # None when the detector found no edge

    @property
    def detected(self) -> bool:
        return self.detected_time_s is not None

    @property
    def measured_delay_s(self) -> Optional[Seconds]:
        if self.detected_time_s is None:
            return None
        return self.detected_time_s - self.led_on_time_s

    @property
    def true_delay_s(self) -> Optional[Seconds]:
        if self.true_display_time_s is None:
            return None
        return self.true_display_time_s - self.led_on_time_s

    @property
    def error_s(self) -> Optional[Seconds]:
        """measured_delay_s - true_delay_s when both exist."""
        if self.measured_delay_s is None or self.true_delay_s is None:
            return None
        return self.measured_delay_s - self.true_delay_s

    def to_dict(self) -> Dict[str, Any]:
        return {
            "led_on_time_s": self.led_on_time_s,
            "true_display_time_s": self.true_display_time_s,
            "detected_time_s": self.detected_time_s,
            "measured_delay_s": self.measured_delay_s,
            "true_delay_s": self.true_delay_s,
        }


@dataclass(frozen=True)
class CampaignConfig:
    """Size, spacing and detector of a measurement campaign."""
    n_measurements: int = 250
    interval_mode: IntervalMode = IntervalMode.RANDOM
    interval_base_s: Seconds = 0.5
    interval_spread_s: Seconds = 0.1  # uniform half-width, random mode only
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.interval_mode, str):
            try:
                object.__setattr__(self, "interval_mode", IntervalMode(self.interval_mode.lower()))
            except ValueError:
                raise ConfigError(f"interval_mode must be 'constant' or 'random', got {self.interval_mode!r}")
        if self.n_measurements < 1:
            raise ConfigError(f"n_measurements must be >= 1, got {self.n_measurements}")
        if self.interval_spread_s < 0:
            raise ConfigError(f"interval_spread_s must be >= 0, got {self.interval_spread_s}")
        if self.min_interval_s < 0:
            raise ConfigError(
                f"overlap: smallest inter-measurement interval {self.min_interval_s} s is negative"
            )

    @property
    def min_interval_s(self) -> Seconds:
        if self.interval_mode is IntervalMode.RANDOM:
            return self.interval_base_s - self.interval_spread_s
        return self.interval_base_s


@dataclass(frozen=True)
class DelayStats:
    """Empirical statistics of one campaign (seconds)."""
    n: int
    min_s: Seconds
    max_s: Seconds
    mean_s: Seconds
    std_s: Seconds
    ci95_lo_s: Seconds
    ci95_hi_s: Seconds

    @property
    def width_s(self) -> Seconds:
        return self.max_s - self.min_s


@dataclass(frozen=True)
class Histogram:
    """Right-open bins [origin + j*w, origin + (j+1)*w)."""
    bin_width_s: Seconds
    origin_s: Seconds
    counts: List[int]

    @property
    def n(self) -> int:
        return int(sum(self.counts))

    def edges(self) -> List[Seconds]:
        return [self.origin_s + j * self.bin_width_s for j in range(len(self.counts) + 1)]


@dataclass(frozen=True)
class TrapezoidFit:
    """Support-extreme estimate of a trapezoid from measured delays."""
    model: TrapezoidModel  # shift = min(delays); t_min folded into t_proc
    n: int
    observed_width_s: Seconds
    theory_width_s: Seconds
    shrinkage_s: Seconds
    expected_shrinkage_s: Seconds


@dataclass(frozen=True)
class DeviceFrame:
    """One parsed line of the device protocol."""
    kind: FrameKind
    tick: Optional[int] = None
    level: Optional[Level] = None
    rate_hz: Optional[Hz] = None
    bits: Optional[int] = None
