"""
G2G SDK - glass-to-glass video latency measurement, simulation and analysis.
"""

from .core.models import (
    Seconds,
    Hz,
    Level,
    ConfigError,
    IntervalMode,
    FrameKind,
    SampleStream,
    DetectorConfig,
    EdgeDetection,
    TrapezoidModel,
    PipelineModel,
    MeasurementRecord,
    CampaignConfig,
    DelayStats,
    Histogram,
    TrapezoidFit,
    DeviceFrame,
)
from .core.detector import max_filter, detect_rising_edge, detect_event
from .core.delay_model import pdf, cdf, stats, sample_delay, sample_delays, pdf_table, model_for_pipeline
from .core.simulator import (
    simulate_trial,
    run_campaign,
    render_campaign,
    true_delay,
    run_sweep,
    run_sweep_async,
)
from .core.delay_stats import (
    compute_stats,
    t_quantile,
    histogram,
    lag_autocorrelation,
    fit_trapezoid,
    expected_shrinkage,
    build_report,
    DelayReport,
)
from .core.device_io import (
    DeviceStreamError,
    RecordSchemaError,
    parse_device_stream,
    serialize_device_stream,
    write_records_csv,
    read_records_csv,
    split_trials,
)
from .core.config import CampaignSetup, load_setup

__version__ = "0.1.0"
__all__ = [
    "Seconds",
    "Hz",
    "Level",
    "ConfigError",
    "IntervalMode",
    "FrameKind",
    "SampleStream",
    "DetectorConfig",
    "EdgeDetection",
    "TrapezoidModel",
    "PipelineModel",
    "MeasurementRecord",
    "CampaignConfig",
    "DelayStats",
    "Histogram",
    "TrapezoidFit",
    "DeviceFrame",
    "max_filter",
    "detect_rising_edge",
    "detect_event",
    "pdf",
    "cdf",
    "stats",
    "sample_delay",
    "sample_delays",
    "pdf_table",
    "model_for_pipeline",
    "simulate_trial",
    "run_campaign",
    "render_campaign",
    "true_delay",
    "run_sweep",
    "run_sweep_async",
    "compute_stats",
    "t_quantile",
    "histogram",
    "lag_autocorrelation",
    "fit_trapezoid",
    "expected_shrinkage",
    "build_report",
    "DelayReport",
    "DeviceStreamError",
    "RecordSchemaError",
    "parse_device_stream",
    "serialize_device_stream",
    "write_records_csv",
    "read_records_csv",
    "split_trials",
    "CampaignSetup",
    "load_setup",
]
