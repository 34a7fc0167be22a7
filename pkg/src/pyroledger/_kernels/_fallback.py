"""Pure-Python implementations of the hot per-pixel kernels.

These are the reference implementations; the compiled Cython module in
``_core.pyx`` mirrors them operation-for-operation so that both backends
produce bit-identical results. Keep the loop structure and the order of
floating point operations in sync between the two files.
"""

import numpy as np

IMPLEMENTATION = "python"

_OFFSETS_4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
_OFFSETS_8 = _OFFSETS_4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))


def label_components(mask, connectivity=4):
    """Label connected foreground components of a binary mask.

    Components are numbered 1..n in row-major first-encounter order;
    background cells stay 0. Returns ``(labels, n)`` with labels int32.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    offsets = _OFFSETS_4 if connectivity == 4 else _OFFSETS_8
    mask = np.ascontiguousarray(mask, dtype=np.uint8)
    nrows, ncols = mask.shape
    labels = np.zeros((nrows, ncols), dtype=np.int32)
    current = 0
    for r0 in range(nrows):
        for c0 in range(ncols):
            if mask[r0, c0] == 0 or labels[r0, c0] != 0:
                continue
            current += 1
            labels[r0, c0] = current
            stack = [(r0, c0)]
            while stack:
                r, c = stack.pop()
                for dr, dc in offsets:
                    nr, nc = r + dr, c + dc
                    if 0 <= nr < nrows and 0 <= nc < ncols:
                        if mask[nr, nc] != 0 and labels[nr, nc] == 0:
                            labels[nr, nc] = current
                            stack.append((nr, nc))
    return labels, current


def severity_loss_sum(pre_carbon, dnbr, rows, cols, bounds, fractions,
                      pre_nodata, dnbr_nodata):
    """Accumulate per-pixel carbon loss density over a pixel list.

    For each pixel: loss density = pre_carbon * combustion fraction of the
    severity bin holding its dnbr value (greatest lower bound <= dnbr,
    fraction 0 below the first bound). Pixels where either input is nodata
    (or NaN) contribute nothing and are counted as skipped.

    Accumulation runs in pixel-list order so the result is reproducible
    bit-for-bit across backends. Returns ``(total, skipped)`` where total
    is in the units of pre_carbon (per-cell area factored in by the caller).
    """
    pre_carbon = np.ascontiguousarray(pre_carbon, dtype=np.float64)
    dnbr = np.ascontiguousarray(dnbr, dtype=np.float64)
    bounds = np.ascontiguousarray(bounds, dtype=np.float64)
    fractions = np.ascontiguousarray(fractions, dtype=np.float64)
    total = 0.0
    skipped = 0
    nlevels = bounds.shape[0]
    for i in range(len(rows)):
        r = rows[i]
        c = cols[i]
        pc = float(pre_carbon[r, c])
        d = float(dnbr[r, c])
        if pc == pre_nodata or pc != pc or d == dnbr_nodata or d != d:
            skipped += 1
            continue
        frac = 0.0
        for j in range(nlevels - 1, -1, -1):
            if d >= bounds[j]:
                frac = float(fractions[j])
                break
        total = total + pc * frac
    return total, skipped
