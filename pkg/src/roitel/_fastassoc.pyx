# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled association kernels: pairwise IoU and greedy matching.

Must stay bit-identical to roitel._pyassoc: same IoU formula evaluated in
the same order, same greedy tie-breaks (IoU descending, lower row, lower
column), inclusive ``iou >= min_iou`` admission.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def pairwise_iou(cnp.ndarray[cnp.float64_t, ndim=2] boxes_a,
                 cnp.ndarray[cnp.float64_t, ndim=2] boxes_b):
    """IoU matrix between two (N,4) / (M,4) arrays of (x, y, w, h) boxes."""
    cdef Py_ssize_t n = boxes_a.shape[0]
    cdef Py_ssize_t m = boxes_b.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n, m), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double ax, ay, aw, ah, bx, by, bw, bh
    cdef double iw, ih, right, bottom, inter, union, val

    for i in range(n):
        ax = boxes_a[i, 0]
        ay = boxes_a[i, 1]
        aw = boxes_a[i, 2]
        ah = boxes_a[i, 3]
        for j in range(m):
            bx = boxes_b[j, 0]
            by = boxes_b[j, 1]
            bw = boxes_b[j, 2]
            bh = boxes_b[j, 3]
            right = ax + aw
            if bx + bw < right:
                right = bx + bw
            iw = right - (ax if ax > bx else bx)
            bottom = ay + ah
            if by + bh < bottom:
                bottom = by + bh
            ih = bottom - (ay if ay > by else by)
            if iw > 0.0 and ih > 0.0:
                inter = iw * ih
            else:
                inter = 0.0
            union = aw * ah + bw * bh - inter
            if union > 0.0:
                val = inter / union
                # identical boxes can round to inter > union by a few ulps
                out[i, j] = val if val < 1.0 else 1.0
            else:
                out[i, j] = 0.0
    return out


def greedy_match(cnp.ndarray[cnp.float64_t, ndim=2] iou_matrix, double min_iou):
    """Greedy one-to-one matching on a precomputed IoU matrix.

    Candidate pairs are ordered by the same lexsort the fallback uses
    (IoU descending, then row, then column), so tie-breaking is identical
    by construction; only the selection walk is compiled.
    """
    cdef Py_ssize_t n = iou_matrix.shape[0]
    cdef Py_ssize_t m = iou_matrix.shape[1]
    matches = []
    if n == 0 or m == 0:
        return matches

    pairs = np.nonzero(iou_matrix >= min_iou)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] rows = pairs[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] cols = pairs[1]
    if rows.shape[0] == 0:
        return matches
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.lexsort(
        (cols, rows, -iou_matrix[rows, cols])
    )

    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_rows = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] used_cols = np.zeros(m, dtype=np.uint8)
    cdef Py_ssize_t k, r, c
    for k in range(order.shape[0]):
        r = rows[order[k]]
        c = cols[order[k]]
        if used_rows[r] or used_cols[c]:
            continue
        used_rows[r] = 1
        used_cols[c] = 1
        matches.append((r, c))
    return matches
