"""
Brightness-stream edge detector.

Raw phototransistor samples go through two steps: a trailing maximum filter
that fills backlight PWM dips, then slope thresholding that declares the
instant the lit LED shows up on the display. Everything stays in integer
brightness levels so results are bit-reproducible.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .models import DetectorConfig, EdgeDetection, SampleStream

logger = logging.getLogger(__name__)


def max_filter(stream: SampleStream, k: int) -> SampleStream:
    """
    Trailing maximum filter: b_i = max(a_j) for max(0, i-k) <= j <= i.

    Args:
        stream: Raw samples (must be non-empty)
        k: Number of previous samples in the window (0 is the identity)

    Returns:
        Stream with identical length, rate and t0

    Raises:
        ValueError: If the stream is empty or k is negative
    """
    if len(stream) == 0:
        raise ValueError("empty input")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    a = stream.samples
    if k == 0:
        return stream.with_samples(a.copy())
    # a[0] belongs to every truncated start window, so padding with it keeps b_i exact
    padded = np.concatenate([np.full(k, a[0], dtype=a.dtype), a])
    b = sliding_window_view(padded, k + 1).max(axis=1)
    return stream.with_samples(b)


def _trigger_mask(b: np.ndarray, cfg: DetectorConfig) -> np.ndarray:
    mask = np.zeros(b.size, dtype=bool)
    if b.size < 2:
        return mask
    mask[1:] |= (b[1:] - b[:-1]) >= cfg.single_step_threshold
    w = cfg.slope_window
    if b.size > w:
        mask[w:] |= (b[w:] - b[:-w]) >= cfg.slope_threshold
    return mask


def detect_rising_edge(
    stream: SampleStream,
    cfg: DetectorConfig,
    start: int = 0,
    stop: Optional[int] = None,
) -> Optional[EdgeDetection]:
    """
    First index i with b_i - b_{i-w} >= slope_threshold or b_i - b_{i-1} >= single_step_threshold.

    The stream is expected to be max-filtered already. Only indices in
    [start, stop) may trigger; differences may reach back before start.
    Returns None when no index qualifies.
    """
    n = len(stream)
    stop = n if stop is None else min(stop, n)
    start = max(start, 0)
    if start >= stop:
        return None
    # one sample of look-back per slope interval is all the rule needs
    lo = max(start - cfg.slope_window, 0)
    mask = _trigger_mask(stream.samples[lo:stop], cfg)
    hits = np.flatnonzero(mask[start - lo:])
    if hits.size == 0:
        return None
    index = int(hits[0]) + start
    detection = EdgeDetection(trigger_index=index, trigger_time_s=stream.time_of(index))
    logger.debug("Rising edge at sample %d (t=%.6fs)", index, detection.trigger_time_s)
    return detection


def detect_event(
    stream: SampleStream,
    cfg: DetectorConfig,
    start: int = 0,
    stop: Optional[int] = None,
) -> Optional[EdgeDetection]:
    """
    Maximum filter followed by rising-edge detection; the entry point for trials and ingestion.

    The filter window is truncated over the first max_filter_len_k samples, so
    PWM dips there are not yet filled and can look like a rising edge. Pass
    start >= cfg.settle_samples when analyzing a PWM-lit stream from its first
    sample; trial and ingestion windows start at the LED-on sample and use the
    samples before it as history.
    """
    filtered = max_filter(stream, cfg.max_filter_len_k)
    return detect_rising_edge(filtered, cfg, start=start, stop=stop)
