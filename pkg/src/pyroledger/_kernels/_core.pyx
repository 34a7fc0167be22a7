# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the kernels in ``_fallback.py``.

Same contracts, same floating point operation order; see the fallback
module for the documented reference behaviour.
"""

import numpy as np

cimport numpy as cnp

IMPLEMENTATION = "cython"


def label_components(mask, int connectivity=4):
    if connectivity != 4 and connectivity != 8:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef const cnp.uint8_t[:, ::1] m = mask
    cdef Py_ssize_t nrows = m.shape[0]
    cdef Py_ssize_t ncols = m.shape[1]
    labels_arr = np.zeros((nrows, ncols), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] labels = labels_arr
    stack_arr = np.empty(nrows * ncols, dtype=np.int64)
    cdef cnp.int64_t[::1] stack = stack_arr

    cdef Py_ssize_t r0, c0, r, c, nr, nc, top, k
    cdef int current = 0
    cdef int noff = 4 if connectivity == 4 else 8
    cdef Py_ssize_t[8] dr
    cdef Py_ssize_t[8] dc
    dr[0] = -1; dc[0] = 0
    dr[1] = 1;  dc[1] = 0
    dr[2] = 0;  dc[2] = -1
    dr[3] = 0;  dc[3] = 1
    dr[4] = -1; dc[4] = -1
    dr[5] = -1; dc[5] = 1
    dr[6] = 1;  dc[6] = -1
    dr[7] = 1;  dc[7] = 1

    for r0 in range(nrows):
        for c0 in range(ncols):
            if m[r0, c0] == 0 or labels[r0, c0] != 0:
                continue
            current += 1
            labels[r0, c0] = current
            top = 0
            stack[top] = r0 * ncols + c0
            top += 1
            while top > 0:
                top -= 1
                r = stack[top] // ncols
                c = stack[top] % ncols
                for k in range(noff):
                    nr = r + dr[k]
                    nc = c + dc[k]
                    if 0 <= nr < nrows and 0 <= nc < ncols:
                        if m[nr, nc] != 0 and labels[nr, nc] == 0:
                            labels[nr, nc] = current
                            stack[top] = nr * ncols + nc
                            top += 1
    return labels_arr, current


def severity_loss_sum(pre_carbon, dnbr, rows, cols, bounds, fractions,
                      double pre_nodata, double dnbr_nodata):
    pre_carbon = np.ascontiguousarray(pre_carbon, dtype=np.float64)
    dnbr = np.ascontiguousarray(dnbr, dtype=np.float64)
    rows = np.ascontiguousarray(rows, dtype=np.int64)
    cols = np.ascontiguousarray(cols, dtype=np.int64)
    bounds = np.ascontiguousarray(bounds, dtype=np.float64)
    fractions = np.ascontiguousarray(fractions, dtype=np.float64)

    cdef const cnp.float64_t[:, ::1] pc_v = pre_carbon
    cdef const cnp.float64_t[:, ::1] d_v = dnbr
    cdef const cnp.int64_t[::1] rows_v = rows
    cdef const cnp.int64_t[::1] cols_v = cols
    cdef const cnp.float64_t[::1] bounds_v = bounds
    cdef const cnp.float64_t[::1] fracs_v = fractions

    cdef Py_ssize_t n = rows_v.shape[0]
    cdef Py_ssize_t nlevels = bounds_v.shape[0]
    cdef Py_ssize_t i, r, c, j
    cdef double total = 0.0
    cdef double pc, d, frac
    cdef long skipped = 0

    for i in range(n):
        r = rows_v[i]
        c = cols_v[i]
        pc = pc_v[r, c]
        d = d_v[r, c]
        if pc == pre_nodata or pc != pc or d == dnbr_nodata or d != d:
            skipped += 1
            continue
        frac = 0.0
        for j in range(nlevels - 1, -1, -1):
            if d >= bounds_v[j]:
                frac = fracs_v[j]
                break
        total = total + pc * frac
    return total, skipped
