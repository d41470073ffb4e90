"""
Analytic glass-to-glass delay distribution.

The delay is a deterministic shift a = t_proc + t_min plus two independent
uniform waits: U(0, 1/f_cam) for camera sampling and U(0, 1/f_dis) for the
display refresh. Their convolution is an isosceles trapezoid on
[a, a + 1/f_cam + 1/f_dis].
"""

from __future__ import annotations

import math
from typing import NamedTuple, Tuple, Union

import numpy as np

from .models import PipelineModel, Seconds, TrapezoidModel

ArrayLike = Union[float, np.ndarray]


class ModelStats(NamedTuple):
    """Closed-form summary of a TrapezoidModel (seconds)."""
    min: Seconds
    mean: Seconds
    max: Seconds
    std: Seconds

    @property
    def width(self) -> Seconds:
        return self.max - self.min


def _as_checked_array(t: ArrayLike) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(t, dtype=float))
    if not np.all(np.isfinite(arr)):
        raise ValueError("t must be finite")
    return arr


def _unwrap(arr: np.ndarray, scalar: bool) -> ArrayLike:
    return float(arr[0]) if scalar else arr


def _widths(m: TrapezoidModel) -> Tuple[float, float, float, float]:
    w1, w2 = m.w_cam, m.w_dis
    return w1, w2, min(w1, w2), max(w1, w2)


def pdf(m: TrapezoidModel, t: ArrayLike) -> ArrayLike:
    """
    Density of the G2G delay at t (1/seconds).

    Linear ramp on [a, a+wmin], plateau 1/wmax on [a+wmin, a+wmax], linear fall
    to a+w1+w2. When both widths are zero the distribution is a point mass:
    the density is 0 off the atom and +inf on it.

    Raises:
        ValueError: If t is not finite
    """
    scalar = np.ndim(t) == 0
    x = _as_checked_array(t) - m.shift_s
    w1, w2, wmin, wmax = _widths(m)
    if wmax == 0.0:
        return _unwrap(np.where(x == 0.0, np.inf, 0.0), scalar)
    total = w1 + w2
    out = np.zeros_like(x)
    plateau = (x >= wmin) & (x <= wmax)
    out[plateau] = 1.0 / wmax
    if wmin > 0.0:
        rise = (x >= 0.0) & (x < wmin)
        fall = (x > wmax) & (x <= total)
        out[rise] = x[rise] / (w1 * w2)
        out[fall] = (total - x[fall]) / (w1 * w2)
    return _unwrap(out, scalar)


def cdf(m: TrapezoidModel, t: ArrayLike) -> ArrayLike:
    """
    Probability that the G2G delay is <= t.

    Raises:
        ValueError: If t is not finite
    """
    scalar = np.ndim(t) == 0
    x = _as_checked_array(t) - m.shift_s
    w1, w2, wmin, wmax = _widths(m)
    if wmax == 0.0:
        return _unwrap(np.where(x >= 0.0, 1.0, 0.0), scalar)
    total = w1 + w2
    out = np.where(x >= total, 1.0, 0.0)
    plateau = (x >= wmin) & (x <= wmax)
    out[plateau] = wmin / (2.0 * wmax) + (x[plateau] - wmin) / wmax
    if wmin > 0.0:
        rise = (x > 0.0) & (x < wmin)
        fall = (x > wmax) & (x < total)
        out[rise] = x[rise] ** 2 / (2.0 * w1 * w2)
        out[fall] = 1.0 - (total - x[fall]) ** 2 / (2.0 * w1 * w2)
    return _unwrap(out, scalar)


def stats(m: TrapezoidModel) -> ModelStats:
    """Closed-form minimum, mean, maximum and standard deviation."""
    w1, w2 = m.w_cam, m.w_dis
    lo = m.shift_s
    return ModelStats(
        min=lo,
        mean=lo + w1 / 2.0 + w2 / 2.0,
        max=lo + w1 + w2,
        std=math.sqrt((w1 * w1 + w2 * w2) / 12.0),
    )


def sample_delay(m: TrapezoidModel, rng: np.random.Generator) -> Seconds:
    """One draw t_proc + U(t_min, t_min + 1/f_cam) + U(0, 1/f_dis)."""
    cam = rng.uniform(m.t_min, m.t_min + m.w_cam)
    ref = rng.uniform(0.0, m.w_dis)
    return float(m.t_proc + cam + ref)


def sample_delays(m: TrapezoidModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized sample_delay; always within the support."""
    cam = rng.uniform(m.t_min, m.t_min + m.w_cam, size=size)
    ref = rng.uniform(0.0, m.w_dis, size=size)
    lo, hi = m.support
    # the float sum may round one ulp past the support edge
    return np.clip(m.t_proc + cam + ref, lo, hi)


def pdf_table(m: TrapezoidModel, points: int = 1000) -> np.ndarray:
    """Evenly spaced (t, pdf, cdf) rows over the support, shape (points, 3)."""
    if points < 2:
        raise ValueError(f"points must be >= 2, got {points}")
    lo, hi = m.support
    t = np.linspace(lo, hi, points)
    return np.column_stack([t, pdf(m, t), cdf(m, t)])


def model_for_pipeline(p: PipelineModel) -> TrapezoidModel:
    """The trapezoid a jitter-free pipeline produces."""
    return TrapezoidModel(t_proc=p.t_proc, t_min=p.t_min, f_cam=p.f_cam, f_dis=p.f_dis)
