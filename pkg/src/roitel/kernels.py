"""Association kernel dispatch: compiled extension when available.

The tracker's per-frame association (pairwise IoU + greedy matching) is the
hot loop when replaying large annotation sets, so it has a Cython
implementation. Import falls back to the pure NumPy version transparently;
both expose identical semantics and bit-identical results. Set
``ROITEL_FORCE_PYTHON=1`` to pin the fallback (used by the benchmark).
"""

from __future__ import annotations

import os

import numpy as np

from . import _pyassoc
from .errors import InvalidParam

_impl = _pyassoc
BACKEND = "python"
if not os.environ.get("ROITEL_FORCE_PYTHON"):
    try:
        from . import _fastassoc as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        pass


def backend_name() -> str:
    """Which kernel implementation was selected at import: compiled|python."""
    return BACKEND


def as_box_array(boxes) -> np.ndarray:
    """Coerce a sequence of (x, y, w, h) rows to a C-contiguous (N,4) array."""
    arr = np.ascontiguousarray(boxes, dtype=np.float64)
    if arr.size == 0:
        return np.zeros((0, 4), dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise InvalidParam(f"expected an (N,4) box array, got shape {arr.shape}")
    return arr


def pairwise_iou(boxes_a, boxes_b) -> np.ndarray:
    """IoU matrix between two box sets; rows index boxes_a, cols boxes_b."""
    return _impl.pairwise_iou(as_box_array(boxes_a), as_box_array(boxes_b))


def greedy_match(iou_matrix: np.ndarray, min_iou: float) -> list[tuple[int, int]]:
    """Greedy one-to-one matching; see the backend modules for tie-breaks."""
    mat = np.ascontiguousarray(iou_matrix, dtype=np.float64)
    if mat.ndim != 2:
        raise InvalidParam(f"expected a 2-D IoU matrix, got shape {mat.shape}")
    return [(int(r), int(c)) for r, c in _impl.greedy_match(mat, float(min_iou))]


def greedy_associate(boxes_a, boxes_b, min_iou: float) -> list[tuple[int, int]]:
    """Convenience composition: pairwise_iou followed by greedy_match."""
    a = as_box_array(boxes_a)
    b = as_box_array(boxes_b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return []
    return greedy_match(_impl.pairwise_iou(a, b), min_iou)
