"""
Measurement-device streams and campaign record files.

Device protocol (ASCII, one frame per line):
  H,<rate_hz>,<bits>   exactly once, before any other frame
  S,<tick>,<level>     one brightness sample; ticks contiguous and increasing
  E,<tick>             LED switched on at this sample tick

Record files are CSV with columns led_on_ms, true_delay_ms, measured_delay_ms
(empty cells for unknown ground truth or undetected trials), 1 us resolution.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import re
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .detector import detect_rising_edge, max_filter
from .models import DetectorConfig, DeviceFrame, FrameKind, MeasurementRecord, SampleStream, Seconds

logger = logging.getLogger(__name__)

MAX_BITS = 16
RECORD_COLUMNS = ("led_on_ms", "true_delay_ms", "measured_delay_ms")

_UINT = re.compile(r"[0-9]{1,18}")


class DeviceStreamError(ValueError):
    """Structured device-stream parse error."""

    def __init__(self, reason: str, line_no: int = 0, line: str = ""):
        self.reason = reason
        self.line_no = line_no
        self.line = line
        where = f"line {line_no}: " if line_no else ""
        super().__init__(f"{where}{reason}" + (f" ({line!r})" if line else ""))


class RecordSchemaError(ValueError):
    """Record CSV does not match the expected columns or values."""

    def __init__(self, column: str, message: str):
        self.column = column
        super().__init__(f"{column}: {message}")


def _uint(text: str, line_no: int, line: str) -> int:
    if not _UINT.fullmatch(text):
        raise DeviceStreamError("malformed", line_no, line)
    return int(text)


def parse_device_line(raw: Union[str, bytes], line_no: int = 0) -> Optional[DeviceFrame]:
    """Parse one protocol line; blank lines yield None."""
    if isinstance(raw, (bytes, bytearray)):
        try:
            raw = bytes(raw).decode("ascii")
        except UnicodeDecodeError:
            raise DeviceStreamError("malformed", line_no, repr(bytes(raw))[:80])
    line = raw.strip()
    if not line:
        return None
    fields = [f.strip() for f in line.split(",")]
    kind = fields[0]
    if kind == FrameKind.HEADER.value and len(fields) == 3:
        try:
            rate = float(fields[1])
        except ValueError:
            raise DeviceStreamError("malformed", line_no, line)
        bits = _uint(fields[2], line_no, line)
        if not (math.isfinite(rate) and rate > 0) or not 1 <= bits <= MAX_BITS:
            raise DeviceStreamError("malformed", line_no, line)
        return DeviceFrame(kind=FrameKind.HEADER, rate_hz=rate, bits=bits)
    if kind == FrameKind.SAMPLE.value and len(fields) == 3:
        return DeviceFrame(
            kind=FrameKind.SAMPLE,
            tick=_uint(fields[1], line_no, line),
            level=_uint(fields[2], line_no, line),
        )
    if kind == FrameKind.EVENT.value and len(fields) == 2:
        return DeviceFrame(kind=FrameKind.EVENT, tick=_uint(fields[1], line_no, line))
    raise DeviceStreamError("malformed", line_no, line)


def parse_device_stream(lines: Iterable[Union[str, bytes]]) -> Tuple[SampleStream, List[Seconds]]:
    """
    Parse a captured device stream.

    Args:
        lines: Protocol lines (str or bytes, with or without line endings)

    Returns:
        (stream, LED-on times in seconds); stream.t0 is first_tick / rate_hz

    Raises:
        DeviceStreamError: reason "no header", "duplicate header", "tick order",
            "tick gap", "level range" or "malformed", with the 1-based line number
    """
    if isinstance(lines, (str, bytes, bytearray)):
        lines = lines.splitlines()
    header: Optional[DeviceFrame] = None
    levels: List[int] = []
    first_tick: Optional[int] = None
    last_tick: Optional[int] = None
    event_ticks: List[int] = []
    max_level = 0
    for line_no, raw in enumerate(lines, start=1):
        frame = parse_device_line(raw, line_no)
        if frame is None:
            continue
        # parse_device_line already proved bytes input is ASCII
        text = (raw if isinstance(raw, str) else bytes(raw).decode("ascii")).strip()
        if frame.kind is FrameKind.HEADER:
            if header is not None:
                raise DeviceStreamError("duplicate header", line_no, text)
            header = frame
            max_level = 2 ** frame.bits - 1
            continue
        if header is None:
            raise DeviceStreamError("no header", line_no, text)
        if frame.kind is FrameKind.SAMPLE:
            if last_tick is not None and frame.tick <= last_tick:
                raise DeviceStreamError("tick order", line_no, text)
            if last_tick is not None and frame.tick != last_tick + 1:
                raise DeviceStreamError("tick gap", line_no, text)
            if frame.level > max_level:
                raise DeviceStreamError("level range", line_no, text)
            if first_tick is None:
                first_tick = frame.tick
            last_tick = frame.tick
            levels.append(frame.level)
        else:
            if event_ticks and frame.tick <= event_ticks[-1]:
                raise DeviceStreamError("tick order", line_no, text)
            event_ticks.append(frame.tick)
    if header is None:
        raise DeviceStreamError("no header")
    rate = header.rate_hz
    stream = SampleStream(
        samples=np.asarray(levels, dtype=np.int64),
        rate_hz=rate,
        resolution_levels=2 ** header.bits,
        t0=(first_tick or 0) / rate,
    )
    events = [tick / rate for tick in event_ticks]
    logger.debug(f"Parsed device stream: {len(stream)} samples, {len(events)} events at {rate} Hz")
    return stream, events


def _format_rate(rate_hz: float) -> str:
    return str(int(rate_hz)) if float(rate_hz).is_integer() else repr(float(rate_hz))


def serialize_device_stream(stream: SampleStream, events: Sequence[Seconds] = ()) -> List[str]:
    """Protocol lines for a stream and its LED events; inverse of parse_device_stream."""
    bits = max(1, math.ceil(math.log2(stream.resolution_levels)))
    if bits > MAX_BITS:
        raise ValueError(f"resolution of {stream.resolution_levels} levels exceeds {MAX_BITS} bits")
    base = round(stream.t0 * stream.rate_hz)
    if base < 0:
        raise ValueError("stream starts before tick 0")
    event_ticks = sorted(round(t * stream.rate_hz) for t in events)
    if any(t < 0 for t in event_ticks) or len(set(event_ticks)) != len(event_ticks):
        raise ValueError("event ticks must be distinct and non-negative")
    lines = [f"H,{_format_rate(stream.rate_hz)},{bits}"]
    pending = iter(event_ticks)
    next_event = next(pending, None)
    for i, level in enumerate(stream.samples.tolist()):
        tick = base + i
        while next_event is not None and next_event <= tick:
            lines.append(f"E,{next_event}")
            next_event = next(pending, None)
        lines.append(f"S,{tick},{level}")
    while next_event is not None:
        lines.append(f"E,{next_event}")
        next_event = next(pending, None)
    return lines


def write_device_stream(stream: SampleStream, events: Sequence[Seconds] = ()) -> str:
    return "\n".join(serialize_device_stream(stream, events)) + "\n"


def _ms_cell(seconds: Optional[float]) -> str:
    return "" if seconds is None else f"{seconds * 1e3:.3f}"


def write_records_csv(records: Iterable[MeasurementRecord]) -> str:
    """CSV text for campaign records; times in milliseconds at 1 us resolution."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_COLUMNS)
    for r in records:
        writer.writerow([_ms_cell(r.led_on_time_s), _ms_cell(r.true_delay_s), _ms_cell(r.measured_delay_s)])
    return buf.getvalue()


def _parse_ms(value: Optional[str], column: str, row_no: int, required: bool) -> Optional[float]:
    value = (value or "").strip()
    if not value:
        if required:
            raise RecordSchemaError(column, f"row {row_no}: value required")
        return None
    try:
        ms = float(value)
    except ValueError:
        raise RecordSchemaError(column, f"row {row_no}: not a number: {value!r}")
    if not math.isfinite(ms):
        raise RecordSchemaError(column, f"row {row_no}: not finite: {value!r}")
    return ms / 1e3


def read_records_csv(text: str) -> List[MeasurementRecord]:
    """
    Records from CSV text written by write_records_csv (or by hand).

    Raises:
        RecordSchemaError: Missing/unexpected column or unparsable value, naming the column
    """
    reader = csv.DictReader(io.StringIO(text))
    columns = reader.fieldnames or []
    for column in RECORD_COLUMNS:
        if column not in columns:
            raise RecordSchemaError(column, "missing column")
    for column in columns:
        if column not in RECORD_COLUMNS:
            raise RecordSchemaError(column, "unexpected column")
    records = []
    for row_no, row in enumerate(reader, start=2):
        led_on = _parse_ms(row.get("led_on_ms"), "led_on_ms", row_no, required=True)
        true_delay = _parse_ms(row.get("true_delay_ms"), "true_delay_ms", row_no, required=False)
        measured = _parse_ms(row.get("measured_delay_ms"), "measured_delay_ms", row_no, required=False)
        records.append(
            MeasurementRecord(
                led_on_time_s=led_on,
                true_display_time_s=None if true_delay is None else led_on + true_delay,
                detected_time_s=None if measured is None else led_on + measured,
            )
        )
    return records


def split_trials(
    stream: SampleStream,
    events: Sequence[Seconds],
    cfg: DetectorConfig,
) -> List[MeasurementRecord]:
    """
    Run the detector once per LED event on the window [event, next event).

    The maximum filter runs over the whole stream, so each window sees the
    preceding samples as filter history.
    """
    events = [float(t) for t in events]
    if events != sorted(set(events)):
        raise ValueError("events must be strictly increasing")
    if not events:
        return []
    filtered = max_filter(stream, cfg.max_filter_len_k)
    bounds = [stream.index_at_or_after(t) for t in events] + [len(stream)]
    records = []
    for i, led_on in enumerate(events):
        detection = detect_rising_edge(filtered, cfg, start=bounds[i], stop=bounds[i + 1])
        if detection is None:
            logger.warning(f"Trial {i}: no rising edge after LED event at {led_on:.6f}s (undetected)")
        records.append(
            MeasurementRecord(
                led_on_time_s=led_on,
                detected_time_s=detection.trigger_time_s if detection else None,
            )
        )
    return records
