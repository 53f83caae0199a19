"""ROI transmission cost estimation and rolling-window bitrate accounting.

The ledger enforces that ROI bits inside any trailing window of length
``window_s`` never exceed ``b_roi * window_s``. Admission is inclusive at
exactly the cap, and the window is half-open: an entry stops counting the
instant it is exactly ``window_s`` old.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .domain import BBox
from .errors import BudgetViolation, InvalidParam


@dataclass(frozen=True)
class CostModel:
    """Bits charged per ROI still: fixed header plus area-scaled payload.

    Defaults are calibrated so a resized 128x128 crop costs about 1.5 KB,
    in line with observed mean still payloads. When ``resize_edge`` is set,
    the crop is modeled at that square size regardless of the source box;
    otherwise the box is padded by ``pad_ratio`` per side.
    """

    header_bytes: int = 400
    bits_per_pixel: float = 0.55
    resize_edge: Optional[float] = None
    pad_ratio: float = 0.15

    def __post_init__(self):
        if self.header_bytes < 0:
            raise InvalidParam(f"header_bytes must be >= 0, got {self.header_bytes}")
        if not self.bits_per_pixel > 0:
            raise InvalidParam(f"bits_per_pixel must be > 0, got {self.bits_per_pixel}")
        if self.resize_edge is not None and not self.resize_edge > 0:
            raise InvalidParam(f"resize_edge must be > 0, got {self.resize_edge}")
        if self.pad_ratio < 0:
            raise InvalidParam(f"pad_ratio must be >= 0, got {self.pad_ratio}")


def estimate_cost(bbox: BBox, model: CostModel) -> float:
    """Estimated transmission cost in bits for one ROI crop; always > 0."""
    if model.resize_edge is not None:
        area = model.resize_edge * model.resize_edge
    else:
        scale = 1.0 + 2.0 * model.pad_ratio
        area = (bbox.w * scale) * (bbox.h * scale)
    return model.header_bytes * 8.0 + model.bits_per_pixel * area


@dataclass(frozen=True)
class LedgerView:
    """Read-only admissibility snapshot handed to policy decisions.

    Carries the window sum rather than a precomputed headroom so that
    ``window_sum + bits <= cap`` is evaluated with exactly the same
    floating-point expression the ledger itself uses.
    """

    window_sum_bits: float
    cap_bits: float

    def admits(self, bits: float) -> bool:
        if not bits > 0:
            raise InvalidParam(f"bits must be > 0, got {bits}")
        return self.window_sum_bits + bits <= self.cap_bits


class BudgetLedger:
    """Time-ordered account of committed ROI bits over a rolling window."""

    def __init__(self, b_roi: float, window_s: float):
        if b_roi < 0:
            raise InvalidParam(f"b_roi must be >= 0, got {b_roi}")
        if not window_s > 0:
            raise InvalidParam(f"window_s must be > 0, got {window_s}")
        self.b_roi = b_roi
        self.window_s = window_s
        self.entries: deque[tuple[float, float]] = deque()
        self.total_bits = 0.0

    @property
    def cap_bits(self) -> float:
        return self.b_roi * self.window_s

    def window_sum(self, now_s: float) -> float:
        """Bits with timestamp in the half-open window (now - window_s, now]."""
        lo = now_s - self.window_s
        return sum(bits for ts, bits in self.entries if lo < ts <= now_s)

    def admits(self, now_s: float, bits: float) -> bool:
        """True iff committing ``bits`` at ``now_s`` keeps the window under cap.

        Pure query: no state change. Inclusive at exactly the cap.
        """
        if not bits > 0:
            raise InvalidParam(f"bits must be > 0, got {bits}")
        return self.window_sum(now_s) + bits <= self.cap_bits

    def view(self, now_s: float) -> LedgerView:
        return LedgerView(window_sum_bits=self.window_sum(now_s), cap_bits=self.cap_bits)

    def commit(self, now_s: float, bits: float) -> None:
        """Record a transmission; prunes entries that left the window.

        Raises BudgetViolation when the caller did not check ``admits``.
        """
        if not self.admits(now_s, bits):
            raise BudgetViolation(
                f"commit of {bits} bits at t={now_s} exceeds cap {self.cap_bits}"
            )
        if self.entries and now_s < self.entries[-1][0]:
            raise InvalidParam(f"commit time {now_s} precedes last entry {self.entries[-1][0]}")
        lo = now_s - self.window_s
        while self.entries and self.entries[0][0] <= lo:
            self.entries.popleft()
        self.entries.append((now_s, bits))
        self.total_bits += bits
