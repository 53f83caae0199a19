"""Run log records and their JSONL serialization.

A run log is one header object followed by one JSON object per line, each
tagged with a "kind" field ("tx" for ROI transmissions, "class" for class
timeline events). Serialization is deterministic: keys are sorted and floats
use the shortest round-trip form, so identical runs produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, TextIO

from .domain import BBox, BudgetConfig, FrameClock
from .errors import ParseError

RUNLOG_KIND = "roitel-runlog"
RUNLOG_VERSION = 1

CLASS_SOURCE_VIDEO = "video"
CLASS_SOURCE_STILL = "still"


@dataclass(frozen=True)
class TransmissionRecord:
    """One ROI sent over the side channel.

    Semantic fields are None when the run had no sidecar entry for this
    transmission; they come in pairs (video_* from the degraded stream,
    still_* from the transmitted crop).
    """

    frame_index: int
    t_s: float
    track_id: int
    bbox: BBox
    cost_bits: float
    score: float
    u_term: float
    s_small_term: float
    n_term: float
    video_conf: Optional[float] = None
    still_conf: Optional[float] = None
    video_label: Optional[int] = None
    still_label: Optional[int] = None
    video_entropy: Optional[float] = None
    still_entropy: Optional[float] = None

    @property
    def has_semantics(self) -> bool:
        return self.still_conf is not None


@dataclass(frozen=True)
class ClassEvent:
    """Class label assumed downstream for a track starting at this frame."""

    frame_index: int
    t_s: float
    track_id: int
    label: int
    source: str  # CLASS_SOURCE_VIDEO or CLASS_SOURCE_STILL


@dataclass
class RunLog:
    """Everything one simulation run produced."""

    variant: str
    clock: FrameClock
    budget: BudgetConfig
    base_bitrate_bps: float
    raw_candidate_count: int = 0
    rejected_budget: int = 0
    rejected_threshold: int = 0
    processed_frame_indices: tuple[int, ...] = ()
    first_frame: Optional[int] = None
    last_frame: Optional[int] = None
    detection_conf_mean: float = 0.0
    duration_s: Optional[float] = None
    config_echo: dict[str, str] = field(default_factory=dict)
    transmissions: list[TransmissionRecord] = field(default_factory=list)
    class_events: list[ClassEvent] = field(default_factory=list)

    @property
    def processed_frames(self) -> int:
        return len(self.processed_frame_indices)

    @property
    def total_roi_bits(self) -> float:
        return sum(tx.cost_bits for tx in self.transmissions)


def _header_obj(log: RunLog) -> dict:
    return {
        "kind": RUNLOG_KIND,
        "version": RUNLOG_VERSION,
        "variant": log.variant,
        "fps": log.clock.fps,
        "frame_stride": log.clock.frame_stride,
        "b_total_bps": log.budget.b_total,
        "b_video_bps": log.budget.b_video,
        "b_roi_bps": log.budget.b_roi,
        "window_s": log.budget.window_s,
        "base_bitrate_bps": log.base_bitrate_bps,
        "raw_candidates": log.raw_candidate_count,
        "rejected_budget": log.rejected_budget,
        "rejected_threshold": log.rejected_threshold,
        "processed_frame_indices": list(log.processed_frame_indices),
        "first_frame": log.first_frame,
        "last_frame": log.last_frame,
        "detection_conf_mean": log.detection_conf_mean,
        "duration_s": log.duration_s,
        "config": dict(sorted(log.config_echo.items())),
    }


def _tx_obj(tx: TransmissionRecord) -> dict:
    return {
        "kind": "tx",
        "frame": tx.frame_index,
        "t_s": tx.t_s,
        "track": tx.track_id,
        "bbox": [tx.bbox.x, tx.bbox.y, tx.bbox.w, tx.bbox.h],
        "cost_bits": tx.cost_bits,
        "score": tx.score,
        "u": tx.u_term,
        "s_small": tx.s_small_term,
        "n": tx.n_term,
        "video_conf": tx.video_conf,
        "still_conf": tx.still_conf,
        "video_label": tx.video_label,
        "still_label": tx.still_label,
        "video_entropy": tx.video_entropy,
        "still_entropy": tx.still_entropy,
    }


def _class_obj(ev: ClassEvent) -> dict:
    return {
        "kind": "class",
        "frame": ev.frame_index,
        "t_s": ev.t_s,
        "track": ev.track_id,
        "label": ev.label,
        "source": ev.source,
    }


def to_jsonl_lines(log: RunLog) -> Iterable[str]:
    yield json.dumps(_header_obj(log), sort_keys=True)
    for tx in log.transmissions:
        yield json.dumps(_tx_obj(tx), sort_keys=True)
    for ev in log.class_events:
        yield json.dumps(_class_obj(ev), sort_keys=True)


def write_jsonl(log: RunLog, fp: TextIO) -> None:
    for line in to_jsonl_lines(log):
        fp.write(line)
        fp.write("\n")


def _require(obj: dict, key: str, line_no: int):
    if key not in obj:
        raise ParseError(line_no, f"missing field {key!r}")
    return obj[key]


def read_jsonl(text: str) -> RunLog:
    """Parse a run log written by write_jsonl. Raises ParseError on damage."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(1, "empty run log")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as err:
        raise ParseError(1, f"bad JSON: {err}") from None
    if not isinstance(header, dict) or header.get("kind") != RUNLOG_KIND:
        raise ParseError(1, "not a run log header")
    if header.get("version") != RUNLOG_VERSION:
        raise ParseError(1, f"unsupported run log version: {header.get('version')}")

    log = RunLog(
        variant=_require(header, "variant", 1),
        clock=FrameClock(
            fps=_require(header, "fps", 1),
            frame_stride=_require(header, "frame_stride", 1),
        ),
        budget=BudgetConfig(
            b_total=_require(header, "b_total_bps", 1),
            b_video=_require(header, "b_video_bps", 1),
            b_roi=_require(header, "b_roi_bps", 1),
            window_s=_require(header, "window_s", 1),
        ),
        base_bitrate_bps=_require(header, "base_bitrate_bps", 1),
        raw_candidate_count=_require(header, "raw_candidates", 1),
        rejected_budget=_require(header, "rejected_budget", 1),
        rejected_threshold=_require(header, "rejected_threshold", 1),
        processed_frame_indices=tuple(_require(header, "processed_frame_indices", 1)),
        first_frame=header.get("first_frame"),
        last_frame=header.get("last_frame"),
        detection_conf_mean=_require(header, "detection_conf_mean", 1),
        duration_s=header.get("duration_s"),
        config_echo=dict(_require(header, "config", 1)),
    )

    for line_no, raw in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(raw)
        except json.JSONDecodeError as err:
            raise ParseError(line_no, f"bad JSON: {err}") from None
        kind = obj.get("kind")
        if kind == "tx":
            bbox = _require(obj, "bbox", line_no)
            if not (isinstance(bbox, list) and len(bbox) == 4):
                raise ParseError(line_no, f"bad bbox: {bbox!r}")
            log.transmissions.append(
                TransmissionRecord(
                    frame_index=_require(obj, "frame", line_no),
                    t_s=_require(obj, "t_s", line_no),
                    track_id=_require(obj, "track", line_no),
                    bbox=BBox(*bbox),
                    cost_bits=_require(obj, "cost_bits", line_no),
                    score=_require(obj, "score", line_no),
                    u_term=_require(obj, "u", line_no),
                    s_small_term=_require(obj, "s_small", line_no),
                    n_term=_require(obj, "n", line_no),
                    video_conf=obj.get("video_conf"),
                    still_conf=obj.get("still_conf"),
                    video_label=obj.get("video_label"),
                    still_label=obj.get("still_label"),
                    video_entropy=obj.get("video_entropy"),
                    still_entropy=obj.get("still_entropy"),
                )
            )
        elif kind == "class":
            source = _require(obj, "source", line_no)
            if source not in (CLASS_SOURCE_VIDEO, CLASS_SOURCE_STILL):
                raise ParseError(line_no, f"bad class source: {source!r}")
            log.class_events.append(
                ClassEvent(
                    frame_index=_require(obj, "frame", line_no),
                    t_s=_require(obj, "t_s", line_no),
                    track_id=_require(obj, "track", line_no),
                    label=_require(obj, "label", line_no),
                    source=source,
                )
            )
        else:
            raise ParseError(line_no, f"unknown record kind: {kind!r}")
    return log
