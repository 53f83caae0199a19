"""Shared builders for the test suite. Oracles live in the test modules."""

from __future__ import annotations

from typing import Optional

from roitel import (
    BBox,
    BudgetConfig,
    CostModel,
    Detection,
    DetectionStream,
    EvalConfig,
    FrameClock,
    PolicyConfig,
    RunConfig,
)
from roitel.tracker import TrackerConfig


def mk_bbox(x=0.0, y=0.0, w=10.0, h=10.0) -> BBox:
    return BBox(x, y, w, h)


def mk_det(frame, x=0.0, y=0.0, w=10.0, h=10.0, conf=0.9, cls=0, hint=None) -> Detection:
    return Detection(
        frame_index=frame,
        bbox=BBox(x, y, w, h),
        confidence=conf,
        class_id=cls,
        track_hint=hint,
    )


def mk_stream(frames, clock: Optional[FrameClock] = None) -> DetectionStream:
    """frames: iterable of (frame_index, [Detection, ...])."""
    return DetectionStream.from_frames(clock or FrameClock(), frames)


def low_regime_cfg(variant="M5", *, base_measured=None, window_s=2.0, **policy_kw) -> RunConfig:
    """Hybrid low-bitrate split with a given policy variant."""
    if variant == "M5" and "score_threshold" not in policy_kw:
        policy_kw["score_threshold"] = 0.0
    return RunConfig(
        clock=FrameClock(fps=15.0, frame_stride=5),
        budget=BudgetConfig(
            b_total=0.8e6, b_video=0.65e6, b_roi=0.15e6, window_s=window_s
        ),
        policy=PolicyConfig(variant=variant, **policy_kw),
        tracker=TrackerConfig(),
        cost=CostModel(),
        eval=EvalConfig(),
        base_bitrate_measured=base_measured,
    )
