"""Detection stream and semantic sidecar ingestion.

Supported inputs:
  * generic detections CSV: frame,track_hint,x,y,w,h,conf,class (0-based
    frames, track_hint -1 for "none")
  * UAVDT-style ground truth: frame,target_id,x,y,w,h,out_of_view,
    occlusion,category (1-based frames, confidence fixed at 1.0)
  * VisDrone-MOT-style: frame,target_id,x,y,w,h,score,category,truncation,
    occlusion (1-based frames, confidence = score clamped to [0,1])
  * semantic sidecar CSV: frame,track,video_conf,still_conf,video_label,
    still_label,video_entropy,still_entropy[,payload_bytes]

The benchmark layouts follow the common public distributions; every parser
accepts a column-order override since the layouts are conventions, not
standards. Comment lines start with '#', blank lines are skipped, LF and
CRLF both work, and frame indices are normalized to 0-based internally.
"""

from __future__ import annotations

import random
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .domain import BBox, Detection, FrameClock
from .errors import DuplicateKey, InvalidParam, ParseError

GENERIC_COLUMNS = ("frame", "track_hint", "x", "y", "w", "h", "conf", "class")
UAVDT_COLUMNS = (
    "frame",
    "target_id",
    "x",
    "y",
    "w",
    "h",
    "out_of_view",
    "occlusion",
    "category",
)
VISDRONE_COLUMNS = (
    "frame",
    "target_id",
    "x",
    "y",
    "w",
    "h",
    "score",
    "category",
    "truncation",
    "occlusion",
)
SIDECAR_COLUMNS = (
    "frame",
    "track",
    "video_conf",
    "still_conf",
    "video_label",
    "still_label",
    "video_entropy",
    "still_entropy",
    "payload_bytes",
)

_CLOCK_COMMENT = re.compile(r"^#\s*clock:\s*fps=([0-9.eE+-]+)\s+stride=(\d+)\s*$")


@dataclass(frozen=True)
class DetectionStream:
    """Ordered per-frame detections plus the source clock."""

    clock: FrameClock
    frames: tuple[tuple[int, tuple[Detection, ...]], ...]

    @staticmethod
    def from_frames(
        clock: FrameClock, frames: Iterable[tuple[int, Sequence[Detection]]]
    ) -> "DetectionStream":
        normalized = []
        prev = None
        for frame_index, dets in frames:
            if prev is not None and frame_index <= prev:
                raise InvalidParam(f"frame indices must strictly increase at {frame_index}")
            prev = frame_index
            for det in dets:
                if det.frame_index != frame_index:
                    raise InvalidParam(
                        f"detection frame {det.frame_index} does not match entry {frame_index}"
                    )
            normalized.append((frame_index, tuple(dets)))
        return DetectionStream(clock=clock, frames=tuple(normalized))

    @property
    def n_detections(self) -> int:
        return sum(len(dets) for _, dets in self.frames)

    @property
    def first_frame(self) -> Optional[int]:
        return self.frames[0][0] if self.frames else None

    @property
    def last_frame(self) -> Optional[int]:
        return self.frames[-1][0] if self.frames else None

    def iter_detections(self) -> Iterable[Detection]:
        for _, dets in self.frames:
            yield from dets


@dataclass(frozen=True)
class SemanticRecord:
    """Classifier probe outputs for one transmitted ROI."""

    frame_index: int
    track_id: int
    video_conf: float
    still_conf: float
    video_label: int
    still_label: int
    video_entropy: float
    still_entropy: float
    payload_bytes: Optional[int] = None

    def __post_init__(self):
        for name in ("video_conf", "still_conf"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise InvalidParam(f"{name} must be in [0,1], got {v}")
        for name in ("video_entropy", "still_entropy"):
            if getattr(self, name) < 0:
                raise InvalidParam(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.payload_bytes is not None and self.payload_bytes <= 0:
            raise InvalidParam(f"payload_bytes must be > 0, got {self.payload_bytes}")


class SemanticSidecar:
    """Map of (frame_index, track_id) -> SemanticRecord with unique keys."""

    def __init__(self, records: Iterable[SemanticRecord] = ()):
        self.records: dict[tuple[int, int], SemanticRecord] = {}
        for rec in records:
            key = (rec.frame_index, rec.track_id)
            if key in self.records:
                raise DuplicateKey(*key)
            self.records[key] = rec

    def get(self, frame_index: int, track_id: int) -> Optional[SemanticRecord]:
        return self.records.get((frame_index, track_id))

    def __len__(self) -> int:
        return len(self.records)

    def __contains__(self, key: tuple[int, int]) -> bool:
        return key in self.records


def _split_rows(text: str) -> tuple[list[tuple[int, list[str]]], Optional[FrameClock]]:
    """Split into (line_no, fields) rows; pick up an embedded clock comment."""
    rows = []
    clock = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _CLOCK_COMMENT.match(line)
            if m:
                clock = FrameClock(fps=float(m.group(1)), frame_stride=int(m.group(2)))
            continue
        rows.append((line_no, [f.strip() for f in line.split(",")]))
    return rows, clock


def _field_index(columns: Sequence[str], name: str) -> int:
    try:
        return columns.index(name)
    except ValueError:
        raise InvalidParam(f"column mapping is missing required column {name!r}") from None


def _num(fields: list[str], idx: int, line_no: int, name: str) -> float:
    try:
        return float(fields[idx])
    except ValueError:
        raise ParseError(line_no, f"non-numeric {name}: {fields[idx]!r}") from None


def _int(fields: list[str], idx: int, line_no: int, name: str) -> int:
    try:
        return int(float(fields[idx]))
    except ValueError:
        raise ParseError(line_no, f"non-numeric {name}: {fields[idx]!r}") from None


def _check_bbox(line_no: int, x: float, y: float, w: float, h: float) -> BBox:
    if w <= 0:
        raise ParseError(line_no, f"non-positive width: {w}")
    if h <= 0:
        raise ParseError(line_no, f"non-positive height: {h}")
    return BBox(x, y, w, h)


def _parse_stream(text, row_fn, n_cols, clock, errors_out):
    rows, file_clock = _split_rows(text)
    by_frame: dict[int, list[Detection]] = defaultdict(list)
    for line_no, fields in rows:
        try:
            if len(fields) != n_cols:
                raise ParseError(
                    line_no, f"expected {n_cols} columns, got {len(fields)}"
                )
            det = row_fn(line_no, fields)
        except ParseError as err:
            if errors_out is None:
                raise
            errors_out.append(err)
            continue
        by_frame[det.frame_index].append(det)
    effective_clock = clock or file_clock or FrameClock()
    return DetectionStream.from_frames(
        effective_clock, ((f, by_frame[f]) for f in sorted(by_frame))
    )


def parse_generic_csv(
    text: str,
    clock: Optional[FrameClock] = None,
    columns: Sequence[str] = GENERIC_COLUMNS,
    errors_out: Optional[list[ParseError]] = None,
) -> DetectionStream:
    """Parse the generic detections CSV (0-based frames)."""
    i_frame = _field_index(columns, "frame")
    i_hint = _field_index(columns, "track_hint")
    i_x, i_y = _field_index(columns, "x"), _field_index(columns, "y")
    i_w, i_h = _field_index(columns, "w"), _field_index(columns, "h")
    i_conf = _field_index(columns, "conf")
    i_class = _field_index(columns, "class")

    def row_fn(line_no, fields):
        frame = _int(fields, i_frame, line_no, "frame")
        if frame < 0:
            raise ParseError(line_no, f"negative frame index: {frame}")
        hint = _int(fields, i_hint, line_no, "track_hint")
        conf = _num(fields, i_conf, line_no, "conf")
        if not (0.0 <= conf <= 1.0):
            raise ParseError(line_no, f"confidence out of range: {conf}")
        bbox = _check_bbox(
            line_no,
            _num(fields, i_x, line_no, "x"),
            _num(fields, i_y, line_no, "y"),
            _num(fields, i_w, line_no, "w"),
            _num(fields, i_h, line_no, "h"),
        )
        return Detection(
            frame_index=frame,
            bbox=bbox,
            confidence=conf,
            class_id=_int(fields, i_class, line_no, "class"),
            track_hint=None if hint < 0 else hint,
        )

    return _parse_stream(text, row_fn, len(columns), clock, errors_out)


def _parse_benchmark(
    text, columns, conf_of, clock, errors_out
):
    """Shared layout for the 1-based-frame benchmark annotation formats."""
    i_frame = _field_index(columns, "frame")
    i_id = _field_index(columns, "target_id")
    i_x, i_y = _field_index(columns, "x"), _field_index(columns, "y")
    i_w, i_h = _field_index(columns, "w"), _field_index(columns, "h")
    i_cat = _field_index(columns, "category")

    def row_fn(line_no, fields):
        frame = _int(fields, i_frame, line_no, "frame")
        if frame < 1:
            raise ParseError(line_no, f"frame index must be >= 1, got {frame}")
        bbox = _check_bbox(
            line_no,
            _num(fields, i_x, line_no, "x"),
            _num(fields, i_y, line_no, "y"),
            _num(fields, i_w, line_no, "w"),
            _num(fields, i_h, line_no, "h"),
        )
        return Detection(
            frame_index=frame - 1,
            bbox=bbox,
            confidence=conf_of(line_no, fields),
            class_id=_int(fields, i_cat, line_no, "category"),
            track_hint=_int(fields, i_id, line_no, "target_id"),
        )

    return _parse_stream(text, row_fn, len(columns), clock, errors_out)


def parse_uavdt_gt(
    text: str,
    clock: Optional[FrameClock] = None,
    columns: Sequence[str] = UAVDT_COLUMNS,
    errors_out: Optional[list[ParseError]] = None,
) -> DetectionStream:
    """Parse UAVDT-style ground truth; confidence is fixed at 1.0."""
    return _parse_benchmark(text, columns, lambda ln, f: 1.0, clock, errors_out)


def parse_visdrone_mot(
    text: str,
    clock: Optional[FrameClock] = None,
    columns: Sequence[str] = VISDRONE_COLUMNS,
    errors_out: Optional[list[ParseError]] = None,
) -> DetectionStream:
    """Parse VisDrone-MOT-style annotations; confidence = clamped score."""
    i_score = _field_index(columns, "score")

    def conf_of(line_no, fields):
        return min(max(_num(fields, i_score, line_no, "score"), 0.0), 1.0)

    return _parse_benchmark(text, columns, conf_of, clock, errors_out)


def parse_sidecar_csv(
    text: str, errors_out: Optional[list[ParseError]] = None
) -> SemanticSidecar:
    """Parse the semantic sidecar; payload_bytes column is optional per row."""
    rows, _ = _split_rows(text)
    sidecar = SemanticSidecar()
    for line_no, fields in rows:
        try:
            if len(fields) not in (8, 9):
                raise ParseError(line_no, f"expected 8 or 9 columns, got {len(fields)}")
            payload = None
            if len(fields) == 9:
                payload = _int(fields, 8, line_no, "payload_bytes")
                if payload <= 0:
                    raise ParseError(line_no, f"payload_bytes must be > 0, got {payload}")
            try:
                rec = SemanticRecord(
                    frame_index=_int(fields, 0, line_no, "frame"),
                    track_id=_int(fields, 1, line_no, "track"),
                    video_conf=_num(fields, 2, line_no, "video_conf"),
                    still_conf=_num(fields, 3, line_no, "still_conf"),
                    video_label=_int(fields, 4, line_no, "video_label"),
                    still_label=_int(fields, 5, line_no, "still_label"),
                    video_entropy=_num(fields, 6, line_no, "video_entropy"),
                    still_entropy=_num(fields, 7, line_no, "still_entropy"),
                    payload_bytes=payload,
                )
            except InvalidParam as err:
                raise ParseError(line_no, str(err)) from None
            key = (rec.frame_index, rec.track_id)
            if key in sidecar:
                raise DuplicateKey(*key)
            sidecar.records[key] = rec
        except ParseError as err:
            if errors_out is None:
                raise
            errors_out.append(err)
    return sidecar


def write_generic_csv(stream: DetectionStream) -> str:
    """Serialize to the generic CSV; re-parsing yields an equal stream.

    Frames with no detections are not representable in CSV and are dropped
    on a round trip.
    """
    clock = stream.clock
    lines = [
        "# roitel detections v1",
        "# columns: " + ",".join(GENERIC_COLUMNS),
        f"# clock: fps={clock.fps!r} stride={clock.frame_stride}",
    ]
    for frame_index, dets in stream.frames:
        for det in dets:
            hint = -1 if det.track_hint is None else det.track_hint
            b = det.bbox
            lines.append(
                f"{frame_index},{hint},{b.x!r},{b.y!r},{b.w!r},{b.h!r},"
                f"{det.confidence!r},{det.class_id}"
            )
    return "\n".join(lines) + "\n"


def gen_synthetic(
    seed: int,
    n_frames: int,
    mean_objects: float,
    clock: FrameClock,
    frame_w: float = 1280.0,
    frame_h: float = 720.0,
) -> DetectionStream:
    """Seeded synthetic stream: linear trajectories with confidence jitter.

    Pure function of its arguments; identical inputs produce identical
    streams. ``mean_objects`` is the target average number of concurrent
    objects per frame. Every frame index in [0, n_frames) gets an entry,
    empty frames included.
    """
    if n_frames <= 0:
        raise InvalidParam(f"n_frames must be > 0, got {n_frames}")
    if mean_objects < 0:
        raise InvalidParam(f"mean_objects must be >= 0, got {mean_objects}")

    rng = random.Random(seed)
    mean_lifetime = 30.0
    n_objects = int(round(mean_objects * n_frames / mean_lifetime))
    by_frame: dict[int, list[Detection]] = {f: [] for f in range(n_frames)}

    for obj_id in range(n_objects):
        birth = rng.randrange(n_frames)
        lifetime = rng.randint(15, 45)
        w = rng.uniform(8.0, 80.0)
        h = rng.uniform(8.0, 60.0)
        x0 = rng.uniform(0.0, max(frame_w - w, 1.0))
        y0 = rng.uniform(0.0, max(frame_h - h, 1.0))
        vx = rng.uniform(-4.0, 4.0)
        vy = rng.uniform(-4.0, 4.0)
        base_conf = rng.uniform(0.4, 0.95)
        class_id = rng.randrange(5)
        for f in range(birth, min(birth + lifetime, n_frames)):
            t = f - birth
            x = min(max(x0 + vx * t, 0.0), max(frame_w - w, 1.0))
            y = min(max(y0 + vy * t, 0.0), max(frame_h - h, 1.0))
            conf = min(max(base_conf + rng.uniform(-0.08, 0.08), 0.0), 1.0)
            by_frame[f].append(
                Detection(
                    frame_index=f,
                    bbox=BBox(x, y, w, h),
                    confidence=conf,
                    class_id=class_id,
                    track_hint=obj_id,
                )
            )

    return DetectionStream.from_frames(clock, ((f, by_frame[f]) for f in range(n_frames)))


def inject_confidence_noise(stream: DetectionStream, amount: float, seed: int) -> DetectionStream:
    """Seeded downward confidence jitter, for exercising confidence-driven
    policies on ground-truth streams whose confidence is uniformly 1.0."""
    if amount < 0:
        raise InvalidParam(f"noise amount must be >= 0, got {amount}")
    rng = random.Random(seed)
    frames = []
    for frame_index, dets in stream.frames:
        noisy = tuple(
            Detection(
                frame_index=d.frame_index,
                bbox=d.bbox,
                confidence=min(max(d.confidence - rng.uniform(0.0, amount), 0.0), 1.0),
                class_id=d.class_id,
                track_hint=d.track_hint,
            )
            for d in dets
        )
        frames.append((frame_index, noisy))
    return DetectionStream.from_frames(stream.clock, frames)
