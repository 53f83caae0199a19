"""Command-line front end: reproducible simulate/sweep/report experiments.

Exit codes: 0 success, 1 parse or configuration error, 2 budget split
violation (b_video + b_roi > b_total) or command-line usage error. Every
command is deterministic given its argument list, config file, and inputs;
report and log files embed the config echo needed for an exact rerun.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import config as config_mod
from . import engine, ingest, metrics, runlog
from .errors import BudgetConfigError, ConfigError, ParseError, RoitelError

INPUT_FORMATS = ("generic", "uavdt", "visdrone")

_REPORT_EXT = {"csv": "csv", "json": "json", "markdown": "md"}

_CONFIG_EPILOG = (
    "config keys (usable in config files and --set overrides):\n"
    + config_mod.schema_help()
)


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fp:
        fp.write(text)


def _load_run_config(args) -> engine.RunConfig:
    if getattr(args, "config", None):
        cfg = config_mod.load_config(_read_text(args.config))
    else:
        cfg = config_mod.build_config({})
    overrides = getattr(args, "set", None) or []
    if overrides:
        cfg = config_mod.apply_overrides(cfg, overrides)
    return cfg


def _parse_stream(args, cfg: Optional[engine.RunConfig]) -> ingest.DetectionStream:
    text = _read_text(args.input)
    clock = cfg.clock if cfg is not None else None
    if args.format == "uavdt":
        stream = ingest.parse_uavdt_gt(text, clock=clock)
    elif args.format == "visdrone":
        stream = ingest.parse_visdrone_mot(text, clock=clock)
    else:
        stream = ingest.parse_generic_csv(text, clock=clock)
    noise = getattr(args, "conf_noise", 0.0) or 0.0
    if noise > 0.0:
        seed = cfg.seed if cfg is not None else 0
        stream = ingest.inject_confidence_noise(stream, noise, seed)
    return stream


def _parse_sidecar(args) -> Optional[ingest.SemanticSidecar]:
    if not getattr(args, "sidecar", None):
        return None
    return ingest.parse_sidecar_csv(_read_text(args.sidecar))


def _lambda_from_cfg(cfg: engine.RunConfig) -> Optional[float]:
    return cfg.eval.lambda_cls


def _lambda_from_echo(echo: dict[str, str]) -> Optional[float]:
    raw = echo.get("eval.lambda_cls", "none")
    return None if raw == "none" else float(raw)


def _report_paths(out_dir: Path, fmt: str) -> Path:
    return out_dir / f"report.{_REPORT_EXT[fmt]}"


def cmd_simulate(args) -> int:
    cfg = _load_run_config(args)
    stream = _parse_stream(args, cfg)
    sidecar = _parse_sidecar(args)
    echo = config_mod.dump_config(cfg)

    log = engine.run(stream, sidecar, cfg, config_echo=echo)
    rep = metrics.aggregate_run(log, _lambda_from_cfg(cfg))

    out_dir = Path(args.out_dir)
    log_path = out_dir / "runlog.jsonl"
    _write_text(log_path, "\n".join(runlog.to_jsonl_lines(log)) + "\n")
    report_path = _report_paths(out_dir, args.report_format)
    _write_text(
        report_path,
        metrics.emit_report([(log.variant, rep)], args.report_format, config_echo=echo),
    )

    for column, value in zip(metrics.REPORT_COLUMNS, metrics.report_row(log.variant, rep)):
        print(f"{column} = {value if value else 'n/a'}")
    print(f"wrote {log_path} and {report_path}", file=sys.stderr)
    return 0


def cmd_sweep(args) -> int:
    variants = [v.strip() for v in args.variants.split(",") if v.strip()]
    if not variants:
        raise ConfigError("sweep needs at least one variant")
    cfg = _load_run_config(args)
    stream = _parse_stream(args, cfg)
    sidecar = _parse_sidecar(args)

    results = engine.sweep(stream, sidecar, cfg, variants)
    out_dir = Path(args.out_dir)
    reports = []
    for variant, log in results:
        _write_text(
            out_dir / f"runlog_{variant}.jsonl", "\n".join(runlog.to_jsonl_lines(log)) + "\n"
        )
        reports.append((variant, metrics.aggregate_run(log, _lambda_from_cfg(cfg))))

    echo = config_mod.dump_config(cfg)
    fmt = args.report_format
    report_text = metrics.emit_report(reports, fmt, config_echo=echo)
    selection_text = metrics.emit_selection_report(reports, fmt, config_echo=echo)
    _write_text(_report_paths(out_dir, fmt), report_text)
    _write_text(out_dir / f"selection.{_REPORT_EXT[fmt]}", selection_text)

    sys.stdout.write(report_text)
    sys.stdout.write(selection_text)
    print(f"wrote {len(results)} run logs under {out_dir}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    labels = [s.strip() for s in args.labels.split(",")] if args.labels else None
    if labels and len(labels) != len(args.runlogs):
        raise ConfigError(
            f"--labels names {len(labels)} runs but {len(args.runlogs)} logs were given"
        )
    reports = []
    echo: Optional[dict[str, str]] = None
    for i, path in enumerate(args.runlogs):
        log = runlog.read_jsonl(_read_text(path))
        if echo is None:
            echo = log.config_echo
        label = labels[i] if labels else log.variant
        reports.append(
            (label, metrics.aggregate_run(log, _lambda_from_echo(log.config_echo)))
        )
    text = metrics.emit_report(reports, args.report_format, config_echo=echo)
    if args.out:
        _write_text(Path(args.out), text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return 0


def cmd_gen_synthetic(args) -> int:
    from .domain import FrameClock

    clock = FrameClock(fps=args.fps, frame_stride=args.stride)
    stream = ingest.gen_synthetic(
        seed=args.seed,
        n_frames=args.n_frames,
        mean_objects=args.mean_objects,
        clock=clock,
    )
    text = ingest.write_generic_csv(stream)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        _write_text(Path(args.out), text)
        print(
            f"wrote {stream.n_detections} detections over {len(stream.frames)} frames to {args.out}",
            file=sys.stderr,
        )
    return 0


def cmd_validate(args) -> int:
    problems: list[str] = []
    budget_violation = False

    cfg = None
    if args.config:
        try:
            cfg = config_mod.load_config(_read_text(args.config))
            overrides = args.set or []
            if overrides:
                cfg = config_mod.apply_overrides(cfg, overrides)
        except BudgetConfigError as err:
            problems.append(f"config: {err}")
            budget_violation = True
        except (ParseError, ConfigError, RoitelError) as err:
            problems.append(f"config: {err}")

    errors: list[ParseError] = []
    text = _read_text(args.input)
    clock = cfg.clock if cfg is not None else None
    if args.format == "uavdt":
        stream = ingest.parse_uavdt_gt(text, clock=clock, errors_out=errors)
    elif args.format == "visdrone":
        stream = ingest.parse_visdrone_mot(text, clock=clock, errors_out=errors)
    else:
        stream = ingest.parse_generic_csv(text, clock=clock, errors_out=errors)
    problems.extend(f"{args.input}: {err}" for err in errors)

    print(f"frames: {len(stream.frames)}")
    print(f"detections: {stream.n_detections}")

    if args.sidecar:
        sc_errors: list[ParseError] = []
        sidecar = ingest.parse_sidecar_csv(_read_text(args.sidecar), errors_out=sc_errors)
        problems.extend(f"{args.sidecar}: {err}" for err in sc_errors)
        known = {
            (det.frame_index, det.track_hint)
            for det in stream.iter_detections()
            if det.track_hint is not None
        }
        matched = sum(1 for key in sidecar.records if key in known)
        unknown = len(sidecar) - matched
        print(f"sidecar records: {len(sidecar)}")
        print(f"sidecar matched: {matched}")
        if unknown:
            # Coverage gaps are legal; the engine simply sends without
            # semantic fields for uncovered ROIs.
            print(
                f"warning: {unknown} sidecar records reference unknown (frame,track) pairs",
                file=sys.stderr,
            )

    if problems:
        for p in problems:
            print(f"violation: {p}", file=sys.stderr)
        return 2 if budget_violation else 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roitel",
        description="Budget-constrained hybrid telemetry simulator: stream "
        "detections, schedule ROI stills under a rolling bitrate budget, "
        "and report selection and semantic-gain metrics.",
        epilog=_CONFIG_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    def add_common_io(p, with_sidecar=True):
        p.add_argument("--input", required=True, help="detections file")
        p.add_argument(
            "--format", choices=INPUT_FORMATS, default="generic", help="input layout"
        )
        if with_sidecar:
            p.add_argument("--sidecar", help="semantic sidecar CSV")

    def add_config_args(p):
        p.add_argument("--config", help="run config file (key = value lines)")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override one config key (repeatable; unknown keys are rejected)",
        )

    def add_run_args(p):
        add_config_args(p)
        p.add_argument(
            "--conf-noise",
            type=float,
            default=0.0,
            metavar="AMOUNT",
            help="seeded downward confidence jitter applied to the input stream",
        )
        p.add_argument(
            "--report-format",
            choices=metrics.REPORT_FORMATS,
            default="csv",
            help="report file format",
        )

    p = sub.add_parser(
        "simulate",
        help="run one policy and write runlog + report",
        epilog=_CONFIG_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_common_io(p)
    add_run_args(p)
    p.add_argument("--out-dir", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser(
        "sweep",
        help="run several policies over the identical stream and budget",
        epilog=_CONFIG_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_common_io(p)
    add_run_args(p)
    p.add_argument(
        "--variants",
        required=True,
        help="comma-separated policy list, e.g. M0,M1,M2,M3,M4,M5 or the preset_* names",
    )
    p.add_argument("--out-dir", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="re-aggregate existing run logs")
    p.add_argument("runlogs", nargs="+", metavar="RUNLOG", help="runlog.jsonl files")
    p.add_argument("--labels", help="comma-separated row labels (default: variants)")
    p.add_argument(
        "--report-format", choices=metrics.REPORT_FORMATS, default="csv"
    )
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("gen-synthetic", help="write a seeded synthetic detections CSV")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--n-frames", type=int, default=300)
    p.add_argument("--mean-objects", type=float, default=5.0)
    p.add_argument("--fps", type=float, default=15.0)
    p.add_argument("--stride", type=int, default=5)
    p.add_argument("--out", default="-", help="output file, or - for stdout")
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser(
        "validate",
        help="check inputs and config; print counts; write nothing",
        epilog=_CONFIG_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_common_io(p)
    add_config_args(p)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetConfigError as err:
        print(f"error: budget violation: {err}", file=sys.stderr)
        return 2
    except (ParseError, ConfigError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except RoitelError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
