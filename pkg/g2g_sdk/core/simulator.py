"""
Discrete-event simulator of the glass-to-glass chain.

LED -> camera frame (captured if lit at least t_min before the frame-period
end) -> readout at the frame end -> processing (t_proc plus optional jitter)
-> graphics buffer -> next display refresh tick -> PWM-modulated panel light
-> 10-bit phototransistor samples at 2 kHz.

Camera and display are free-running clocks: tick n is phase + n/f, derived
by index arithmetic so long campaigns do not drift.
"""

from __future__ import annotations

import asyncio
import logging
import math
from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import truncnorm

from .detector import detect_event
from .models import (
    CampaignConfig,
    DetectorConfig,
    IntervalMode,
    MeasurementRecord,
    PipelineModel,
    SampleStream,
    Seconds,
)

logger = logging.getLogger(__name__)

PRE_ROLL_S = 0.050
POST_ROLL_S = 0.050
# processing jitter is a Gaussian truncated to [0, t_proc + JITTER_BOUND_SIGMAS * std]
JITTER_BOUND_SIGMAS = 6.0
# tolerance in clock periods for instants that land exactly on a tick
_TICK_EPS = 1e-9


def capture_frame_end(p: PipelineModel, led_on_time_s: Seconds) -> Seconds:
    """End of the first frame period that starts at least t_min after the LED (closed bound)."""
    n = math.ceil((led_on_time_s + p.t_min - p.cam_phase) * p.f_cam - _TICK_EPS)
    return p.cam_phase + n / p.f_cam


def refresh_tick_at_or_after(p: PipelineModel, t: Seconds) -> Seconds:
    """First display refresh tick at or after t."""
    m = math.ceil((t - p.dis_phase) * p.f_dis - _TICK_EPS)
    return p.dis_phase + m / p.f_dis


def _display_time(p: PipelineModel, led_on_time_s: Seconds, proc_delay_s: Seconds) -> Seconds:
    readout = capture_frame_end(p, led_on_time_s)
    buffered = readout + proc_delay_s
    return refresh_tick_at_or_after(p, buffered)


def true_delay(p: PipelineModel, led_on_time_s: Seconds) -> Seconds:
    """Ground-truth G2G delay of a jitter-free chain for an LED switched on at led_on_time_s."""
    return _display_time(p, led_on_time_s, p.t_proc) - led_on_time_s


def worst_case_delay_s(p: PipelineModel) -> Seconds:
    jitter = JITTER_BOUND_SIGMAS * p.proc_jitter_std
    return p.t_proc + jitter + p.t_min + 1.0 / p.f_cam + 1.0 / p.f_dis


def trial_span_s(p: PipelineModel) -> Seconds:
    """Fixed slot of one trial: pre-roll, worst-case delay and post-roll."""
    return PRE_ROLL_S + worst_case_delay_s(p) + POST_ROLL_S


def draw_processing_delay(p: PipelineModel, rng: np.random.Generator) -> Seconds:
    if p.proc_jitter_std == 0.0:
        return p.t_proc
    sigma = p.proc_jitter_std
    value = truncnorm.rvs(
        a=-p.t_proc / sigma,
        b=JITTER_BOUND_SIGMAS,
        loc=p.t_proc,
        scale=sigma,
        random_state=rng,
    )
    return float(value)


def render_panel(
    p: PipelineModel,
    t0: Seconds,
    n_samples: int,
    lit: Sequence[Tuple[Seconds, Seconds]],
    rng: np.random.Generator,
) -> SampleStream:
    """
    Sensor samples of the panel spot showing the LED.

    Args:
        p: Pipeline with panel levels, PWM and noise parameters
        t0: Time of sample 0
        n_samples: Number of samples
        lit: Sorted, disjoint [on, off) display intervals in which the lit LED is shown
        rng: Noise source
    """
    times = t0 + np.arange(n_samples) / p.rate_hz
    if lit:
        ons = np.array([on for on, _ in lit], dtype=float)
        offs = np.array([off for _, off in lit], dtype=float)
        shown = np.searchsorted(ons, times, side="right") > np.searchsorted(offs, times, side="right")
    else:
        shown = np.zeros(n_samples, dtype=bool)
    level = np.where(shown, float(p.led_on_level), float(p.led_off_level))
    if p.pwm_freq_hz > 0 and p.pwm_depth_levels > 0:
        # 50 % duty square wave locked to absolute time
        dark = np.mod(times * p.pwm_freq_hz, 1.0) >= 0.5
        level = level - np.where(dark, float(p.pwm_depth_levels), 0.0)
    if p.noise_std_levels > 0:
        level = level + rng.normal(0.0, p.noise_std_levels, size=n_samples)
    samples = np.clip(np.rint(level), 0, p.resolution_levels - 1).astype(np.int64)
    return SampleStream(
        samples=samples,
        rate_hz=p.rate_hz,
        resolution_levels=p.resolution_levels,
        t0=t0,
    )


def simulate_trial(
    p: PipelineModel,
    led_on_time_s: Seconds,
    rng: np.random.Generator,
    detector: Optional[DetectorConfig] = None,
) -> Tuple[SampleStream, MeasurementRecord]:
    """
    Simulate one LED event and run the detector on the resulting stream.

    The stream covers [led_on - 50 ms, display + 50 ms]; triggers are only
    accepted from the LED-on sample onwards, the pre-roll is filter history.
    """
    if led_on_time_s < 0:
        raise ValueError(f"led_on_time_s must be >= 0, got {led_on_time_s}")
    detector = detector or DetectorConfig()
    display = _display_time(p, led_on_time_s, draw_processing_delay(p, rng))
    t0 = led_on_time_s - PRE_ROLL_S
    n_samples = int(math.floor((display + POST_ROLL_S - t0) * p.rate_hz)) + 1
    stream = render_panel(p, t0, n_samples, [(display, math.inf)], rng)
    detection = detect_event(stream, detector, start=stream.index_at_or_after(led_on_time_s))
    record = MeasurementRecord(
        led_on_time_s=led_on_time_s,
        true_display_time_s=display,
        detected_time_s=detection.trigger_time_s if detection else None,
    )
    if detection is None:
        logger.warning(f"No edge detected for LED event at {led_on_time_s:.6f}s")
    return stream, record


def _snap_to_sample_grid(t: Seconds, rate_hz: float) -> Seconds:
    return round(t * rate_hz) / rate_hz


def led_on_schedule(p: PipelineModel, c: CampaignConfig, rng: np.random.Generator) -> np.ndarray:
    """
    LED-on instants of a campaign.

    Trial i starts one interval after the end of trial i-1's slot; instants sit
    on the sensor sample grid because the device switches the LED on a tick.
    """
    if c.interval_mode is IntervalMode.RANDOM:
        intervals = c.interval_base_s + rng.uniform(
            -c.interval_spread_s, c.interval_spread_s, size=c.n_measurements
        )
    else:
        intervals = np.full(c.n_measurements, c.interval_base_s)
    span = trial_span_s(p)
    times = np.empty(c.n_measurements)
    t = PRE_ROLL_S + intervals[0]
    for i in range(c.n_measurements):
        if i:
            t = t + span + intervals[i]
        times[i] = _snap_to_sample_grid(t, p.rate_hz)
    return times


def run_campaign(p: PipelineModel, c: CampaignConfig) -> List[MeasurementRecord]:
    """Simulate c.n_measurements trials against free-running camera and display clocks."""
    rng = np.random.default_rng(c.seed)
    schedule = led_on_schedule(p, c, rng)
    records = []
    for i, led_on in enumerate(schedule):
        _, record = simulate_trial(p, float(led_on), rng, c.detector)
        records.append(record)
        if (i + 1) % 100 == 0:
            logger.debug(f"Campaign progress: {i + 1}/{c.n_measurements} trials")
    detected = sum(1 for r in records if r.detected)
    logger.info(
        f"Campaign finished: {len(records)} trials, {detected} detected "
        f"(f_cam={p.f_cam} Hz, f_dis={p.f_dis} Hz, mode={c.interval_mode.value})"
    )
    return records


def render_campaign(
    p: PipelineModel,
    c: CampaignConfig,
    records: Optional[Sequence[MeasurementRecord]] = None,
) -> Tuple[SampleStream, List[Seconds], List[MeasurementRecord]]:
    """
    One continuous device recording of a whole campaign.

    The recording shows the campaign run_campaign(p, c) simulates (or the given
    records of it): the same LED-on instants and the same display instants,
    processing jitter included. The LED is switched off at the end of its trial
    slot; the off transition travels through the same chain with delays and
    sensor noise drawn from a stream separate from the campaign's. Returned
    records carry ground truth only, detection is left to the ingestion path.
    """
    if records is None:
        records = run_campaign(p, c)
    if len(records) != c.n_measurements:
        raise ValueError(f"{len(records)} records for a campaign of {c.n_measurements}")
    rng = np.random.default_rng([c.seed, 1])
    schedule = [r.led_on_time_s for r in records]
    hold = worst_case_delay_s(p) + POST_ROLL_S
    lit = []
    for r in records:
        if r.true_display_time_s is None:
            raise ValueError(f"record at {r.led_on_time_s:.6f}s has no display time")
        shown_off = _display_time(p, r.led_on_time_s + hold, draw_processing_delay(p, rng))
        lit.append((r.true_display_time_s, shown_off))
    for i in range(len(lit) - 1):
        if lit[i][1] > lit[i + 1][0]:
            lit[i] = (lit[i][0], lit[i + 1][0])
    end = lit[-1][1] + POST_ROLL_S
    stream = render_panel(p, 0.0, int(math.floor(end * p.rate_hz)) + 1, lit, rng)
    truth = [
        MeasurementRecord(led_on_time_s=led_on, true_display_time_s=on)
        for led_on, (on, _) in zip(schedule, lit)
    ]
    logger.info(f"Rendered campaign recording: {len(stream)} samples, {len(schedule)} LED events")
    return stream, schedule, truth


def pipeline_for_rate(p: PipelineModel, f_cam: float, t_min: Optional[Seconds] = None) -> PipelineModel:
    """p at another camera frame rate, exposing for the whole frame period."""
    period = 1.0 / f_cam
    return replace(
        p,
        f_cam=f_cam,
        exposure_s=period,
        t_min=p.t_min if t_min is None else t_min,
        cam_phase=math.fmod(p.cam_phase, period),
    )


async def run_sweep_async(
    p: PipelineModel,
    c: CampaignConfig,
    rates: Sequence[float],
    t_mins: Optional[Sequence[Seconds]] = None,
    concurrency: int = 4,
) -> List[List[MeasurementRecord]]:
    """One campaign per camera frame rate, results in input order."""
    if not rates:
        raise ValueError("empty rate list")
    if t_mins is not None and len(t_mins) != len(rates):
        raise ValueError("t_mins must match rates in length")
    # each rate owns an independent random stream derived from the campaign seed
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(c.seed).spawn(len(rates))]
    jobs = [
        (pipeline_for_rate(p, rate, None if t_mins is None else t_mins[i]), replace(c, seed=seeds[i]))
        for i, rate in enumerate(rates)
    ]

    semaphore = asyncio.Semaphore(concurrency)
    loop = asyncio.get_running_loop()

    async def run_single(job: Tuple[PipelineModel, CampaignConfig]) -> List[MeasurementRecord]:
        async with semaphore:
            return await loop.run_in_executor(None, run_campaign, *job)

    results = await asyncio.gather(*(run_single(job) for job in jobs))
    logger.info(f"Sweep finished: {len(rates)} frame rates")
    return list(results)


def run_sweep(
    p: PipelineModel,
    c: CampaignConfig,
    rates: Sequence[float],
    t_mins: Optional[Sequence[Seconds]] = None,
    concurrency: int = 4,
) -> List[List[MeasurementRecord]]:
    """Blocking wrapper around run_sweep_async."""
    return asyncio.run(run_sweep_async(p, c, rates, t_mins, concurrency))
