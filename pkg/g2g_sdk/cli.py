"""
Command-line interface: `g2g simulate | sweep | analyze | ingest | model`.

Times on the command line and in every output are milliseconds; internally
everything is seconds. Exit codes: 0 success, 2 bad input or configuration,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

from . import __version__
from .core import delay_model, delay_stats, device_io, simulator
from .core.config import CampaignSetup, load_setup, parse_overrides
from .core.models import ConfigError, DetectorConfig, MeasurementRecord, TrapezoidModel

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_BAD_INPUT = 2
EXIT_IO = 3

DEFAULT_SEED = 0
RECORDS_FILE = "records.csv"
REPORT_FILE = "report.json"
SWEEP_FILE = "sweep.csv"
SWEEP_COLUMNS = ("rate_hz", "n", "min_ms", "mean_ms", "ci95_lo_ms", "ci95_hi_ms", "max_ms", "std_ms")
PDF_COLUMNS = ("t_ms", "pdf_per_s", "cdf")


def _number_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in text.split(",") if item.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}") from exc
    return values


def _configure_logging(verbosity: int) -> None:
    logging.basicConfig(
        level=logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )
    if verbosity >= 2:
        logging.getLogger("g2g_sdk").setLevel(logging.DEBUG)
    elif verbosity == 1:
        logging.getLogger("g2g_sdk").setLevel(logging.INFO)


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    logger.info(f"Wrote {path}")


def _read_input(source: str) -> bytes:
    if source == "-":
        return sys.stdin.buffer.read()
    return Path(source).read_bytes()


def _load(args: argparse.Namespace) -> CampaignSetup:
    """Config file, then --set overrides in order, then --seed."""
    overrides = parse_overrides(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    return load_setup(args.config, overrides)


def _measured_delays(records: Sequence[MeasurementRecord]) -> List[float]:
    delays = [r.measured_delay_s for r in records if r.measured_delay_s is not None]
    missed = len(records) - len(delays)
    if missed:
        logger.warning(f"{missed} of {len(records)} trials undetected; excluded from statistics")
    return delays


def campaign_report(
    records: Sequence[MeasurementRecord], theory: Optional[TrapezoidModel] = None
) -> delay_stats.DelayReport:
    """JSON report of the measured delays of a campaign."""
    stats = delay_stats.compute_stats(_measured_delays(records))
    return delay_stats.build_report(stats, theory)


def _report_json(report: delay_stats.DelayReport) -> str:
    return report.model_dump_json(indent=2) + "\n"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        _write_text(Path(out), text)
    else:
        sys.stdout.write(text)


# Subcommands


def cmd_simulate(args: argparse.Namespace) -> int:
    setup = _load(args)
    out_dir = Path(args.out)
    records = simulator.run_campaign(setup.pipeline, setup.campaign)
    records_text = device_io.write_records_csv(records)
    _write_text(out_dir / RECORDS_FILE, records_text)

    if args.record_stream:
        stream, schedule, _ = simulator.render_campaign(setup.pipeline, setup.campaign, records)
        _write_text(Path(args.record_stream), device_io.write_device_stream(stream, schedule))

    # the report is built from the file contents so analyze reproduces it exactly
    stored = device_io.read_records_csv(records_text)
    if sum(1 for r in stored if r.detected) < 2:
        logger.warning("Fewer than 2 detected trials; no report written")
        return EXIT_OK
    report = campaign_report(stored, delay_model.model_for_pipeline(setup.pipeline))
    _write_text(out_dir / REPORT_FILE, _report_json(report))
    if args.format == "json":
        sys.stdout.write(_report_json(report))
    else:
        print(delay_stats.format_report_text(report))
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    setup = _load(args)
    rates = args.rates if args.rates is not None else setup.sweep.f_cam
    if not rates:
        raise ValueError("empty rate list")
    if args.t_min_ms is not None:
        t_mins: Optional[List[float]] = [v * 1e-3 for v in args.t_min_ms]
    elif args.rates is None:
        t_mins = setup.sweep.t_min
    else:
        t_mins = None
    if t_mins is not None and len(t_mins) != len(rates):
        raise ConfigError(f"{len(t_mins)} t_min values for {len(rates)} rates")

    results = simulator.run_sweep(
        setup.pipeline, setup.campaign, rates, t_mins, concurrency=args.jobs
    )
    out_dir = Path(args.out)
    for rate, records in zip(rates, results):
        _write_text(out_dir / f"records_{rate:g}hz.csv", device_io.write_records_csv(records))
    delays = [_measured_delays(records) for records in results]
    short = [f"{rate:g}" for rate, d in zip(rates, delays) if len(d) < 2]
    if short:
        logger.warning(f"Fewer than 2 detected trials at {', '.join(short)} Hz; no sweep table written")
        return EXIT_OK
    rows = [delay_stats.compute_stats(d) for d in delays]

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for rate, s in zip(rates, rows):
        writer.writerow(
            [f"{rate:g}", s.n]
            + [f"{v * 1e3:.3f}" for v in (s.min_s, s.mean_s, s.ci95_lo_s, s.ci95_hi_s, s.max_s, s.std_s)]
        )
    _write_text(out_dir / SWEEP_FILE, buf.getvalue())
    print(delay_stats.sweep_table_text(rates, rows))
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    if args.bin_width_ms is not None and not (args.bin_width_ms > 0 and math.isfinite(args.bin_width_ms)):
        raise ValueError(f"bin width must be > 0, got {args.bin_width_ms} ms")
    records = device_io.read_records_csv(_read_input(args.records).decode("utf-8"))
    theory = None
    if args.config or args.set:
        theory = delay_model.model_for_pipeline(_load(args).pipeline)
    report = campaign_report(records, theory)
    hist = None
    if args.bin_width_ms is not None:
        hist = delay_stats.histogram(_measured_delays(records), args.bin_width_ms * 1e-3)
    if args.format == "json":
        _emit(_report_json(report), args.out)
    else:
        _emit(delay_stats.format_report_text(report) + "\n", args.out)
    if hist is not None:
        edges = hist.edges()
        for j, count in enumerate(hist.counts):
            print(f"[{edges[j] * 1e3:7.1f}, {edges[j + 1] * 1e3:7.1f}) ms  {count}", file=sys.stderr)
    return EXIT_OK


def _detector_from_args(args: argparse.Namespace) -> DetectorConfig:
    cfg = _load(args).campaign.detector if (args.config or args.set) else DetectorConfig()
    changes = {
        name: getattr(args, name)
        for name in ("max_filter_len_k", "slope_threshold", "slope_window", "single_step_threshold")
        if getattr(args, name) is not None
    }
    return replace(cfg, **changes) if changes else cfg


def cmd_ingest(args: argparse.Namespace) -> int:
    detector = _detector_from_args(args)
    stream, events = device_io.parse_device_stream(_read_input(args.stream))
    records = device_io.split_trials(stream, events, detector)
    logger.info(f"Ingested {len(records)} trials from {len(stream)} samples")
    _emit(device_io.write_records_csv(records), args.out)
    return EXIT_OK


def _model_from_args(args: argparse.Namespace) -> TrapezoidModel:
    """Config model (if any) with the explicit rate and delay flags applied on top."""
    flags = {
        "f_cam": args.f_cam,
        "f_dis": args.f_dis,
        "t_proc": None if args.t_proc is None else args.t_proc * 1e-3,
        "t_min": None if args.t_min is None else args.t_min * 1e-3,
    }
    given = {name: value for name, value in flags.items() if value is not None}
    if args.config or args.set:
        return replace(delay_model.model_for_pipeline(_load(args).pipeline), **given)
    if args.f_cam is None or args.f_dis is None:
        raise ConfigError("model needs --f-cam and --f-dis (or a --config)")
    return TrapezoidModel(
        t_proc=given.get("t_proc", 0.0), t_min=given.get("t_min", 0.0), f_cam=args.f_cam, f_dis=args.f_dis
    )


def cmd_model(args: argparse.Namespace) -> int:
    m = _model_from_args(args)
    report = delay_stats.build_model_report(m)
    if args.format == "json":
        sys.stdout.write(report.model_dump_json(indent=2) + "\n")
    else:
        print(delay_stats.format_model_text(report))
    if args.out:
        table = delay_model.pdf_table(m, points=args.points)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(PDF_COLUMNS)
        for t, density, prob in table:
            writer.writerow([f"{t * 1e3:.6f}", f"{density:.9g}", f"{prob:.9g}"])
        _write_text(Path(args.out), buf.getvalue())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug logging")

    configured = argparse.ArgumentParser(add_help=False)
    configured.add_argument("--config", help="key = value campaign config file (times in ms)")
    configured.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key; repeatable, applied after --config, last one wins",
    )

    seeded = argparse.ArgumentParser(add_help=False)
    seeded.add_argument(
        "--seed", type=int, default=None, help=f"campaign RNG seed (config 'seed', default {DEFAULT_SEED})"
    )

    def fmt(default: str) -> argparse.ArgumentParser:
        # one parent per subcommand: argparse shares parent actions, defaults included
        parent = argparse.ArgumentParser(add_help=False)
        parent.add_argument(
            "--format", choices=("text", "json"), default=default, help=f"report format (default {default})"
        )
        return parent

    parser = argparse.ArgumentParser(prog="g2g", description="Glass-to-glass video latency toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "simulate", parents=[common, configured, seeded, fmt("text")], help="simulate one measurement campaign"
    )
    p.add_argument("--out", required=True, help=f"output directory ({RECORDS_FILE}, {REPORT_FILE})")
    p.add_argument("--record-stream", help="also write the campaign as one device-protocol recording")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common, configured, seeded], help="one campaign per camera frame rate")
    p.add_argument("--rates", type=_number_list, help="camera frame rates in Hz, e.g. 25,50,300 (overrides sweep_f_cam)")
    p.add_argument("--t-min-ms", type=_number_list, help="per-rate t_min in ms (overrides sweep_t_min)")
    p.add_argument("--jobs", type=int, default=4, help="campaigns run concurrently")
    p.add_argument("--out", required=True, help=f"output directory ({SWEEP_FILE}, per-rate records)")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("analyze", parents=[common, configured, fmt("json")], help="statistics of a records CSV")
    p.add_argument("records", help="records CSV, '-' for stdin")
    p.add_argument("--out", help="report file (default stdout)")
    p.add_argument("--bin-width-ms", type=float, help="also print a histogram to stderr")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("ingest", parents=[common, configured], help="detect delays in a device recording")
    p.add_argument("stream", help="device-protocol file, '-' for stdin")
    p.add_argument("--out", help="records CSV (default stdout)")
    p.add_argument("--max-filter-len-k", dest="max_filter_len_k", type=int)
    p.add_argument("--slope-threshold", dest="slope_threshold", type=int)
    p.add_argument("--slope-window", dest="slope_window", type=int)
    p.add_argument("--single-step-threshold", dest="single_step_threshold", type=int)
    p.set_defaults(handler=cmd_ingest)

    p = sub.add_parser("model", parents=[common, configured, fmt("text")], help="analytic delay distribution")
    p.add_argument("--f-cam", type=float, help="camera frame rate, Hz")
    p.add_argument("--f-dis", type=float, help="display refresh rate, Hz")
    p.add_argument("--t-proc", type=float, help="processing delay, ms (default 0, or the config value)")
    p.add_argument("--t-min", type=float, help="minimum camera lead time, ms (default 0, or the config value)")
    p.add_argument("--points", type=int, default=1000, help="pdf table points over the support")
    p.add_argument("--out", help="pdf table CSV")
    p.set_defaults(handler=cmd_model)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.handler(args)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
