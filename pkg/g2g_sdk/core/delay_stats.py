"""
Campaign statistics and reports.

Min/mean/max triple, unbiased standard deviation, Student's-t confidence
interval for the mean, histograms, lag autocorrelation and support-extreme
trapezoid estimation.
"""

from __future__ import annotations

import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.special import betaincinv

from . import delay_model
from .models import DelayStats, Histogram, Seconds, TrapezoidFit, TrapezoidModel

logger = logging.getLogger(__name__)

MIN_SAMPLES_FOR_EXTREMES = 10


def _as_delays(delays: Sequence[float]) -> np.ndarray:
    arr = np.asarray(delays, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ValueError("delays must be finite")
    return arr


def t_quantile(p: float, dof: float) -> float:
    """
    Inverse CDF of Student's t distribution, via the inverse regularized incomplete beta function.

    Args:
        p: Probability, 0 < p < 1
        dof: Degrees of freedom, >= 1

    Raises:
        ValueError: On domain violations
    """
    if not (0.0 < p < 1.0):
        raise ValueError(f"p must satisfy 0 < p < 1, got {p}")
    if not (math.isfinite(dof) and dof >= 1):
        raise ValueError(f"dof must be >= 1, got {dof}")
    if p == 0.5:
        return 0.0
    tail = 2.0 * min(p, 1.0 - p)
    # P(|T| > t) = I_x(dof/2, 1/2) with x = dof / (dof + t^2)
    x = float(betaincinv(dof / 2.0, 0.5, tail))
    t = math.sqrt(dof * (1.0 - x) / x)
    return t if p > 0.5 else -t


def compute_stats(delays: Sequence[float], confidence: float = 0.95) -> DelayStats:
    """
    Summary statistics of a delay campaign.

    The confidence interval is mean +/- t_{(1+confidence)/2, n-1} * std / sqrt(n).

    Raises:
        ValueError: If fewer than two delays are given ("insufficient data")
    """
    arr = _as_delays(delays)
    n = arr.size
    if n < 2:
        raise ValueError(f"insufficient data: need at least 2 delays, got {n}")
    if not (0.0 < confidence < 1.0):
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    lo, hi = float(arr.min()), float(arr.max())
    mean = min(max(float(arr.mean()), lo), hi)
    std = float(arr.std(ddof=1))
    half = t_quantile(0.5 + confidence / 2.0, n - 1) * std / math.sqrt(n)
    return DelayStats(
        n=n,
        min_s=lo,
        max_s=hi,
        mean_s=mean,
        std_s=std,
        ci95_lo_s=mean - half,
        ci95_hi_s=mean + half,
    )


def histogram(
    delays: Sequence[float],
    bin_width_s: Seconds,
    origin_s: Optional[Seconds] = None,
) -> Histogram:
    """
    Right-open histogram of delays.

    The origin defaults to floor(min / bin_width) * bin_width; an explicit
    origin must not lie above the smallest delay.
    """
    if not (bin_width_s > 0 and math.isfinite(bin_width_s)):
        raise ValueError(f"bin_width_s must be > 0, got {bin_width_s}")
    arr = _as_delays(delays)
    if arr.size == 0:
        raise ValueError("insufficient data: no delays to bin")
    lo = float(arr.min())
    if origin_s is None:
        origin_s = math.floor(lo / bin_width_s) * bin_width_s
    elif origin_s > lo:
        raise ValueError(f"origin {origin_s} lies above the smallest delay {lo}")
    idx = np.floor((arr - origin_s) / bin_width_s).astype(np.int64)
    # guards the one-ulp case where origin rounds above the minimum
    idx = np.clip(idx, 0, None)
    counts = np.bincount(idx)
    return Histogram(bin_width_s=bin_width_s, origin_s=origin_s, counts=[int(c) for c in counts])


def lag_autocorrelation(delays: Sequence[float], lag: int = 1) -> float:
    """
    Pearson correlation of (x_i, x_{i+lag}).

    Raises:
        ValueError: If lag < 1, fewer than lag + 2 points, or a side has zero variance
    """
    if lag < 1:
        raise ValueError(f"lag must be >= 1, got {lag}")
    arr = _as_delays(delays)
    if arr.size < lag + 2:
        raise ValueError(f"insufficient data: need at least {lag + 2} delays for lag {lag}")
    x, y = arr[:-lag], arr[lag:]
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        raise ValueError("zero variance: autocorrelation undefined for constant delays")
    r = float(np.corrcoef(x, y)[0, 1])
    return max(-1.0, min(1.0, r))


def expected_shrinkage(
    m: TrapezoidModel,
    n: int,
    rng: Optional[np.random.Generator] = None,
    reps: int = 200,
) -> Seconds:
    """Monte Carlo mean of (theoretical width - sample max + sample min) for n draws from m."""
    if n < 2 or reps < 1:
        raise ValueError("expected_shrinkage needs n >= 2 and reps >= 1")
    rng = rng if rng is not None else np.random.default_rng(0)
    total = 0.0
    for _ in range(reps):
        draws = delay_model.sample_delays(m, rng, n)
        total += m.width_s - float(draws.max() - draws.min())
    return total / reps


def fit_trapezoid(
    delays: Sequence[float],
    f_cam: float,
    f_dis: float,
    rng: Optional[np.random.Generator] = None,
    reps: int = 200,
) -> TrapezoidFit:
    """
    Estimate the trapezoid from support extremes.

    The shift is min(delays) (t_proc and t_min cannot be told apart, so t_min
    is folded into t_proc) and the width is max - min. Shrinkage is the
    theoretical width 1/f_cam + 1/f_dis minus the observed width.

    Raises:
        ValueError: With fewer than 10 delays ("insufficient data for extremes")
    """
    arr = _as_delays(delays)
    n = arr.size
    if n < MIN_SAMPLES_FOR_EXTREMES:
        raise ValueError(f"insufficient data for extremes: need {MIN_SAMPLES_FOR_EXTREMES}, got {n}")
    lo, hi = float(arr.min()), float(arr.max())
    model = TrapezoidModel(t_proc=lo, t_min=0.0, f_cam=f_cam, f_dis=f_dis)
    observed = hi - lo
    shrinkage = model.width_s - observed
    if shrinkage < 0:
        logger.warning(
            f"Observed width {observed * 1e3:.1f} ms exceeds theoretical {model.width_s * 1e3:.1f} ms"
        )
    return TrapezoidFit(
        model=model,
        n=n,
        observed_width_s=observed,
        theory_width_s=model.width_s,
        shrinkage_s=shrinkage,
        expected_shrinkage_s=expected_shrinkage(model, n, rng=rng, reps=reps),
    )


# Reports


def _ms(seconds: float) -> float:
    return round(seconds * 1e3, 3)


class TheoryReport(BaseModel):
    min_ms: float
    mean_ms: float
    max_ms: float
    width_ms: float


class DelayReport(BaseModel):
    """Machine-readable campaign report; all values in milliseconds."""
    n: int
    min_ms: float
    mean_ms: float
    max_ms: float
    std_ms: float
    ci95_ms: List[float]
    width_ms: float
    theory: Optional[TheoryReport] = None
    shrinkage_ms: Optional[float] = None


class ModelReport(TheoryReport):
    """Analytic delay distribution of a pipeline (model subcommand)."""
    std_ms: float
    t_proc_ms: float
    t_min_ms: float
    f_cam: float
    f_dis: float


def build_model_report(m: TrapezoidModel) -> ModelReport:
    ms = delay_model.stats(m)
    return ModelReport(
        min_ms=_ms(ms.min),
        mean_ms=_ms(ms.mean),
        max_ms=_ms(ms.max),
        width_ms=_ms(ms.width),
        std_ms=_ms(ms.std),
        t_proc_ms=_ms(m.t_proc),
        t_min_ms=_ms(m.t_min),
        f_cam=m.f_cam,
        f_dis=m.f_dis,
    )


def format_model_text(report: ModelReport) -> str:
    """Analytic min/mean/max triple; the width is printed at 0.01 ms."""
    return "\n".join(
        [
            f"Trapezoid model (f_cam = {report.f_cam:g} Hz, f_dis = {report.f_dis:g} Hz,"
            f" t_proc = {report.t_proc_ms:.1f} ms, t_min = {report.t_min_ms:.1f} ms)",
            f"  {'min':<10}{report.min_ms:>8.1f} ms",
            f"  {'mean':<10}{report.mean_ms:>8.1f} ms",
            f"  {'max':<10}{report.max_ms:>8.1f} ms",
            f"  {'std':<10}{report.std_ms:>8.1f} ms",
            f"  {'width':<10}{report.width_ms:>8.2f} ms",
        ]
    )


def build_report(s: DelayStats, theory: Optional[TrapezoidModel] = None) -> DelayReport:
    """Report of a campaign, optionally against the analytic model it should follow."""
    theory_report = None
    shrinkage = None
    if theory is not None:
        ms = delay_model.stats(theory)
        theory_report = TheoryReport(
            min_ms=_ms(ms.min), mean_ms=_ms(ms.mean), max_ms=_ms(ms.max), width_ms=_ms(ms.width)
        )
        shrinkage = _ms(ms.width - s.width_s)
    return DelayReport(
        n=s.n,
        min_ms=_ms(s.min_s),
        mean_ms=_ms(s.mean_s),
        max_ms=_ms(s.max_s),
        std_ms=_ms(s.std_s),
        ci95_ms=[_ms(s.ci95_lo_s), _ms(s.ci95_hi_s)],
        width_ms=_ms(s.width_s),
        theory=theory_report,
        shrinkage_ms=shrinkage,
    )


def format_report_text(report: DelayReport) -> str:
    """Aligned human-readable report at 0.1 ms granularity."""
    lo, hi = report.ci95_ms
    lines = [
        f"G2G delay report (n = {report.n})",
        f"  {'min':<10}{report.min_ms:>8.1f} ms",
        f"  {'mean':<10}{report.mean_ms:>8.1f} ms   95% CI [{lo:.1f}, {hi:.1f}] ms",
        f"  {'max':<10}{report.max_ms:>8.1f} ms",
        f"  {'std':<10}{report.std_ms:>8.1f} ms",
        f"  {'width':<10}{report.width_ms:>8.1f} ms",
    ]
    if report.theory is not None:
        th = report.theory
        lines.append(
            f"  {'theory':<10}min {th.min_ms:.1f} / mean {th.mean_ms:.1f} / max {th.max_ms:.1f} ms,"
            f" width {th.width_ms:.1f} ms"
        )
    if report.shrinkage_ms is not None:
        lines.append(f"  {'shrinkage':<10}{report.shrinkage_ms:>8.1f} ms")
    return "\n".join(lines)


def sweep_table_text(rates: Sequence[float], rows: Sequence[DelayStats]) -> str:
    """Aligned per-rate table: rate, min, mean with CI, max, std (ms)."""
    lines = [f"{'rate_hz':>8}  {'min':>7}  {'mean [95% CI]':>24}  {'max':>7}  {'std':>6}"]
    for rate, s in zip(rates, rows):
        mean_ci = f"{s.mean_s * 1e3:.1f} [{s.ci95_lo_s * 1e3:.1f}, {s.ci95_hi_s * 1e3:.1f}]"
        lines.append(
            f"{rate:>8g}  {s.min_s * 1e3:>7.1f}  {mean_ci:>24}  {s.max_s * 1e3:>7.1f}  {s.std_s * 1e3:>6.1f}"
        )
    return "\n".join(lines)
