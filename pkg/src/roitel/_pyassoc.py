"""Pure NumPy fallback for the association kernels.

Semantics must stay bit-identical to the compiled extension: same IoU
formula, same greedy order (IoU descending, then lower row, then lower
column), inclusive ``iou >= min_iou`` admission.
"""

from __future__ import annotations

import numpy as np


def pairwise_iou(boxes_a: np.ndarray, boxes_b: np.ndarray) -> np.ndarray:
    """IoU matrix between two (N,4) / (M,4) arrays of (x, y, w, h) boxes."""
    ax = boxes_a[:, 0:1]
    ay = boxes_a[:, 1:2]
    aw = boxes_a[:, 2:3]
    ah = boxes_a[:, 3:4]
    bx = boxes_b[:, 0].reshape(1, -1)
    by = boxes_b[:, 1].reshape(1, -1)
    bw = boxes_b[:, 2].reshape(1, -1)
    bh = boxes_b[:, 3].reshape(1, -1)

    iw = np.minimum(ax + aw, bx + bw) - np.maximum(ax, bx)
    ih = np.minimum(ay + ah, by + bh) - np.maximum(ay, by)
    inter = np.maximum(iw, 0.0) * np.maximum(ih, 0.0)
    union = aw * ah + bw * bh - inter
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(union > 0.0, inter / union, 0.0)
    # identical boxes can round to inter > union by a few ulps
    np.minimum(out, 1.0, out=out)
    return np.ascontiguousarray(out, dtype=np.float64)


def greedy_match(iou_matrix: np.ndarray, min_iou: float) -> list[tuple[int, int]]:
    """Greedy one-to-one matching on a precomputed IoU matrix.

    Pairs are taken in descending IoU order among pairs with
    ``iou >= min_iou``; ties break toward the lower row index, then the
    lower column index. Returns (row, col) pairs in selection order.
    """
    n, m = iou_matrix.shape
    if n == 0 or m == 0:
        return []
    rows, cols = np.nonzero(iou_matrix >= min_iou)
    if rows.size == 0:
        return []
    order = np.lexsort((cols, rows, -iou_matrix[rows, cols]))
    used_rows = np.zeros(n, dtype=bool)
    used_cols = np.zeros(m, dtype=bool)
    matches: list[tuple[int, int]] = []
    for k in order:
        r = int(rows[k])
        c = int(cols[k])
        if used_rows[r] or used_cols[c]:
            continue
        used_rows[r] = True
        used_cols[c] = True
        matches.append((r, c))
    return matches
