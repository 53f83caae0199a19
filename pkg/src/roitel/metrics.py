"""Aggregate run logs into the reported metric suite.

All aggregation is pure and permutation-invariant over transmissions:
float accumulation uses math.fsum, which is exactly rounded and therefore
order-independent. Semantic means are computed only over transmissions
that carried sidecar data and are reported as absent (None) when none did.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

from .errors import DuplicateLabel, InvalidParam
from .runlog import RunLog

REPORT_COLUMNS = (
    "policy",
    "rois",
    "rate_hz",
    "bitrate_mbps",
    "share",
    "mean_bytes",
    "video_conf",
    "still_conf",
    "conf_gain",
    "pos_rate",
    "entropy_gain",
)

SELECTION_COLUMNS = ("policy", "selected_rois", "selection_ratio", "frame_coverage")

REPORT_FORMATS = ("csv", "json", "markdown")


@dataclass(frozen=True)
class MetricsReport:
    """One run's aggregate numbers; semantic fields None without coverage."""

    selected_rois: int
    selection_ratio: float
    frame_coverage: float
    roi_rate_hz: float
    roi_bitrate_bps: float
    bitrate_share: float
    mean_payload_bytes: float
    mean_video_conf: Optional[float]
    mean_still_conf: Optional[float]
    mean_conf_gain: Optional[float]
    positive_gain_rate: Optional[float]
    mean_entropy_gain: Optional[float]
    prediction_change_rate: Optional[float]
    tracks_refined: int
    combined_utility: Optional[float]
    total_payload_bits: float
    duration_s: float
    base_bitrate_bps: float
    semantic_count: int


def derive_duration(log: RunLog) -> float:
    """Duration used for rate normalization.

    The explicit evaluation duration wins when configured; otherwise the
    processed-frame span over fps. Single-frame and empty runs have no
    derivable span and need the explicit setting.
    """
    if log.duration_s is not None:
        return log.duration_s
    p = log.processed_frame_indices
    if len(p) < 2:
        raise InvalidParam(
            "cannot derive a duration from fewer than two processed frames; "
            "set eval.duration_s"
        )
    return (p[-1] - p[0]) / log.clock.fps


def aggregate(
    log: RunLog,
    base_bitrate_bps: float,
    duration_s: float,
    lambda_cls: Optional[float] = None,
) -> MetricsReport:
    """Reduce one run log to the metric suite."""
    if not duration_s > 0:
        raise InvalidParam(f"duration_s must be > 0, got {duration_s}")
    if base_bitrate_bps < 0:
        raise InvalidParam(f"base_bitrate_bps must be >= 0, got {base_bitrate_bps}")

    txs = log.transmissions
    selected = len(txs)
    raw = log.raw_candidate_count
    ratio = selected / raw if raw > 0 else 0.0
    processed = log.processed_frames
    covered = len({tx.frame_index for tx in txs})
    coverage = covered / processed if processed > 0 else 0.0

    total_bits = math.fsum(tx.cost_bits for tx in txs)
    roi_bitrate = total_bits / duration_s
    denom = base_bitrate_bps + roi_bitrate
    share = roi_bitrate / denom if denom > 0 else 0.0
    mean_bytes = (total_bits / 8.0) / selected if selected else 0.0

    sem = [tx for tx in txs if tx.has_semantics]
    n_sem = len(sem)
    if n_sem:
        mean_video = math.fsum(tx.video_conf for tx in sem) / n_sem
        mean_still = math.fsum(tx.still_conf for tx in sem) / n_sem
        gains = [tx.still_conf - tx.video_conf for tx in sem]
        mean_gain = math.fsum(gains) / n_sem
        pos_rate = sum(1 for g in gains if g > 0.0) / n_sem
        mean_entropy = math.fsum(tx.video_entropy - tx.still_entropy for tx in sem) / n_sem
        change_rate = sum(1 for tx in sem if tx.still_label != tx.video_label) / n_sem
    else:
        mean_video = mean_still = mean_gain = None
        pos_rate = mean_entropy = change_rate = None

    combined = None
    if lambda_cls is not None:
        # Proxy line: mean detection confidence stands in for the detection
        # utility, plus the weighted semantic gain (0 without coverage).
        combined = log.detection_conf_mean + lambda_cls * (mean_gain if n_sem else 0.0)

    return MetricsReport(
        selected_rois=selected,
        selection_ratio=ratio,
        frame_coverage=coverage,
        roi_rate_hz=selected / duration_s,
        roi_bitrate_bps=roi_bitrate,
        bitrate_share=share,
        mean_payload_bytes=mean_bytes,
        mean_video_conf=mean_video,
        mean_still_conf=mean_still,
        mean_conf_gain=mean_gain,
        positive_gain_rate=pos_rate,
        mean_entropy_gain=mean_entropy,
        prediction_change_rate=change_rate,
        tracks_refined=len({tx.track_id for tx in txs}),
        combined_utility=combined,
        total_payload_bits=total_bits,
        duration_s=duration_s,
        base_bitrate_bps=base_bitrate_bps,
        semantic_count=n_sem,
    )


def aggregate_run(log: RunLog, lambda_cls: Optional[float] = None) -> MetricsReport:
    """Aggregate with base bitrate and duration taken from the log itself."""
    return aggregate(log, log.base_bitrate_bps, derive_duration(log), lambda_cls)


def selection_stats(log: RunLog) -> tuple[int, float, float]:
    """(selected, selection ratio, frame coverage) for one run."""
    selected = len(log.transmissions)
    raw = log.raw_candidate_count
    ratio = selected / raw if raw > 0 else 0.0
    processed = log.processed_frames
    covered = len({tx.frame_index for tx in log.transmissions})
    coverage = covered / processed if processed > 0 else 0.0
    return selected, ratio, coverage


def _fmt(value, spec: str) -> str:
    if value is None:
        return ""
    return format(value, spec)


def report_row(label: str, rep: MetricsReport) -> list[str]:
    """Formatted cells for one report row, in REPORT_COLUMNS order."""
    return [
        label,
        str(rep.selected_rois),
        _fmt(rep.roi_rate_hz, ".3f"),
        _fmt(rep.roi_bitrate_bps / 1e6, ".4f"),
        _fmt(rep.bitrate_share, ".4f"),
        _fmt(rep.mean_payload_bytes, ".0f"),
        _fmt(rep.mean_video_conf, ".3f"),
        _fmt(rep.mean_still_conf, ".3f"),
        _fmt(rep.mean_conf_gain, ".3f"),
        _fmt(rep.positive_gain_rate, ".3f"),
        _fmt(rep.mean_entropy_gain, ".3f"),
    ]


def _selection_row(label: str, rep: MetricsReport) -> list[str]:
    return [
        label,
        str(rep.selected_rois),
        _fmt(rep.selection_ratio, ".3f"),
        _fmt(rep.frame_coverage, ".3f"),
    ]


def _check_labels(reports) -> None:
    seen = set()
    for label, _ in reports:
        if label in seen:
            raise DuplicateLabel(f"duplicate report label {label!r}")
        seen.add(label)


def _extras(rep: MetricsReport) -> dict:
    return {
        "selection_ratio": rep.selection_ratio,
        "frame_coverage": rep.frame_coverage,
        "prediction_change_rate": rep.prediction_change_rate,
        "tracks_refined": rep.tracks_refined,
        "combined_utility_proxy": rep.combined_utility,
        "roi_bitrate_bps": rep.roi_bitrate_bps,
        "total_payload_bits": rep.total_payload_bits,
        "duration_s": rep.duration_s,
        "base_bitrate_bps": rep.base_bitrate_bps,
        "semantic_count": rep.semantic_count,
    }


def _emit_table(
    columns: tuple[str, ...],
    rows: list[list[str]],
    fmt: str,
    config_echo: Optional[dict[str, str]],
    json_extras: Optional[list[dict]] = None,
) -> str:
    if fmt == "csv":
        lines = []
        if config_echo:
            for key in sorted(config_echo):
                lines.append(f"# {key} = {config_echo[key]}")
        lines.append(",".join(columns))
        lines.extend(",".join(row) for row in rows)
        return "\n".join(lines) + "\n"
    if fmt == "json":
        def cell(v: str):
            if v == "":
                return None
            try:
                return int(v)
            except ValueError:
                pass
            try:
                return float(v)
            except ValueError:
                return v

        obj = {
            "columns": list(columns),
            "rows": [
                {col: cell(v) for col, v in zip(columns, row)} for row in rows
            ],
        }
        if json_extras is not None:
            for row_obj, extra in zip(obj["rows"], json_extras):
                row_obj["extra"] = extra
        if config_echo is not None:
            obj["config"] = dict(sorted(config_echo.items()))
        return json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if fmt == "markdown":
        header = "| " + " | ".join(columns) + " |"
        rule = "|" + "|".join(" --- " for _ in columns) + "|"
        lines = [header, rule]
        lines.extend("| " + " | ".join(v if v else "-" for v in row) + " |" for row in rows)
        if config_echo:
            lines.append("")
            lines.extend(f"    {key} = {config_echo[key]}" for key in sorted(config_echo))
        return "\n".join(lines) + "\n"
    raise InvalidParam(f"unknown report format {fmt!r}; expected one of {REPORT_FORMATS}")


def emit_report(
    reports: list[tuple[str, MetricsReport]],
    fmt: str = "csv",
    config_echo: Optional[dict[str, str]] = None,
) -> str:
    """Render the pilot-results table (11 fixed columns) for many runs."""
    _check_labels(reports)
    rows = [report_row(label, rep) for label, rep in reports]
    extras = [_extras(rep) for _, rep in reports]
    return _emit_table(REPORT_COLUMNS, rows, fmt, config_echo, json_extras=extras)


def emit_selection_report(
    reports: list[tuple[str, MetricsReport]],
    fmt: str = "csv",
    config_echo: Optional[dict[str, str]] = None,
) -> str:
    """Render the selector-sweep table (selected / ratio / coverage)."""
    _check_labels(reports)
    rows = [_selection_row(label, rep) for label, rep in reports]
    return _emit_table(SELECTION_COLUMNS, rows, fmt, config_echo)
