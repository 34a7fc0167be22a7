"""Burn classification, external-mask ingestion, and fire delineation.

Detection and delineation are separate composable steps: a burn mask can
come from thresholding a dNBR grid (the built-in baseline) or from any
external per-pixel detector whose predictions are written as a {0,1,nodata}
grid file. Perimeters are maximal connected components of burned pixels;
4-connectivity is the conservative default, 8 is available via config.

Unknown pixels (nodata in the inputs) never join a component. They are
surfaced as a separate unknown-area diagnostic because dropping them
silently would bias burned area, and hence emissions, low.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .raster import RasterGrid

UNBURNED = 0
BURNED = 1
UNKNOWN = 2


class MaskValueError(ValueError):
    """External mask contains values other than {0, 1, nodata}."""

    def __init__(self, message, cells=None):
        super().__init__(message)
        self.cells = cells or []


@dataclass(frozen=True)
class BurnMask:
    """Per-pixel burn state on the same geometry as its source grids."""

    ncols: int
    nrows: int
    x_origin: float
    y_origin: float
    cell_size: float
    pixels: np.ndarray = field(repr=False)  # int8, values in {UNBURNED, BURNED, UNKNOWN}

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.int8).reshape(self.nrows, self.ncols).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    @property
    def cell_area_m2(self) -> float:
        return self.cell_size * self.cell_size

    @property
    def burned_count(self) -> int:
        return int(np.count_nonzero(self.pixels == BURNED))

    @property
    def unknown_count(self) -> int:
        return int(np.count_nonzero(self.pixels == UNKNOWN))

    @property
    def burned_area_m2(self) -> float:
        return self.burned_count * self.cell_area_m2

    @property
    def unknown_area_m2(self) -> float:
        """Area that could not be classified; biases burned area low."""
        return self.unknown_count * self.cell_area_m2


@dataclass(frozen=True)
class FirePerimeter:
    """One maximal connected component of burned pixels."""

    component_id: int
    pixel_set: list[tuple[int, int]]
    area_m2: float
    bounding_box: tuple[int, int, int, int]  # row_min, col_min, row_max, col_max

    @property
    def pixel_count(self) -> int:
        return len(self.pixel_set)


def _mask_from(grid: RasterGrid, pixels: np.ndarray) -> BurnMask:
    return BurnMask(grid.ncols, grid.nrows, grid.x_origin, grid.y_origin,
                    grid.cell_size, pixels)


def classify_burn(dnbr: RasterGrid, threshold: float) -> BurnMask:
    """Threshold baseline: burned iff dNBR >= threshold; nodata -> unknown."""
    nodata = dnbr.nodata_mask()
    pixels = np.where(dnbr.values >= threshold, BURNED, UNBURNED).astype(np.int8)
    pixels[nodata] = UNKNOWN
    return _mask_from(dnbr, pixels)


def ingest_mask(grid: RasterGrid) -> BurnMask:
    """Adapt an external detector's {0,1,nodata} grid into a BurnMask."""
    nodata = grid.nodata_mask()
    valid = ~nodata
    bad = valid & (grid.values != 0.0) & (grid.values != 1.0)
    if bad.any():
        rows, cols = np.nonzero(bad)
        cells = [(int(r), int(c), float(grid.values[r, c])) for r, c in zip(rows, cols)]
        shown = ", ".join(f"({r},{c})={v!r}" for r, c, v in cells[:10])
        more = f" and {len(cells) - 10} more" if len(cells) > 10 else ""
        raise MaskValueError(
            f"mask values must be 0, 1, or nodata; offending cells: {shown}{more}",
            cells=cells)
    pixels = np.where(grid.values == 1.0, BURNED, UNBURNED).astype(np.int8)
    pixels[nodata] = UNKNOWN
    return _mask_from(grid, pixels)


def mask_to_grid(mask: BurnMask, nodata_sentinel: float = -9999.0) -> RasterGrid:
    """Render a BurnMask as a {0,1,nodata} grid for file output."""
    values = np.where(mask.pixels == BURNED, 1.0, 0.0)
    values[mask.pixels == UNKNOWN] = nodata_sentinel
    return RasterGrid(mask.ncols, mask.nrows, mask.x_origin, mask.y_origin,
                      mask.cell_size, nodata_sentinel, values)


def extract_perimeters(mask: BurnMask, connectivity: int = 4) -> list[FirePerimeter]:
    """Maximal connected burned components, largest first.

    Ordering is deterministic: descending area, ties broken by ascending
    (row_min, col_min). Component ids are 1-based positions in that order.
    Pixel lists are row-major sorted.
    """
    binary = (mask.pixels == BURNED).astype(np.uint8)
    labels, count = _kernels.label_components(binary, connectivity)
    components = []
    for label in range(1, count + 1):
        rows, cols = np.nonzero(labels == label)
        pixel_set = [(int(r), int(c)) for r, c in zip(rows, cols)]
        bbox = (int(rows.min()), int(cols.min()), int(rows.max()), int(cols.max()))
        components.append((pixel_set, bbox))
    components.sort(key=lambda pc: (-len(pc[0]), pc[1][0], pc[1][1]))
    return [
        FirePerimeter(
            component_id=i + 1,
            pixel_set=pixel_set,
            area_m2=len(pixel_set) * mask.cell_area_m2,
            bounding_box=bbox,
        )
        for i, (pixel_set, bbox) in enumerate(components)
    ]
