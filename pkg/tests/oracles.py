"""Independent reference implementations used only to check the engine.

These deliberately share no code with the package: the flood fill is
recursive (the engine's labeler is an iterative scan), and the horizon
probability enumerates every Bernoulli outcome rather than using the
closed form.
"""

import itertools
import sys


def flood_fill_components(burned, connectivity=4):
    """Recursive flood fill; returns a set of frozensets of (row, col)."""
    nrows = len(burned)
    ncols = len(burned[0]) if nrows else 0
    offsets = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    if connectivity == 8:
        offsets += [(-1, -1), (-1, 1), (1, -1), (1, 1)]
    seen = [[False] * ncols for _ in range(nrows)]
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10 * nrows * ncols + 1000))

    def visit(r, c, acc):
        seen[r][c] = True
        acc.add((r, c))
        for dr, dc in offsets:
            nr, nc = r + dr, c + dc
            if 0 <= nr < nrows and 0 <= nc < ncols and burned[nr][nc] and not seen[nr][nc]:
                visit(nr, nc, acc)

    components = set()
    for r in range(nrows):
        for c in range(ncols):
            if burned[r][c] and not seen[r][c]:
                acc = set()
                visit(r, c, acc)
                components.add(frozenset(acc))
    return components


def horizon_fire_probability(rate, horizon):
    """P(at least one fire) by exhaustive enumeration of all year outcomes."""
    total = 0.0
    for outcome in itertools.product((0, 1), repeat=horizon):
        p = 1.0
        for fire in outcome:
            p *= rate if fire else (1.0 - rate)
        if any(outcome):
            total += p
    return total
