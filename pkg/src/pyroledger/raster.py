"""Raster grids, portable ASCII-grid I/O, and spectral indices.

The grid file format is the ESRI-style ASCII grid: six header lines
(``ncols``, ``nrows``, ``xllcorner``, ``yllcorner``, ``cellsize``,
``NODATA_value``; keys case-insensitive), then ``nrows`` whitespace
separated data rows, top row first. It is textual, diffable, and every
GIS package can emit it.

Index formulas are the community-standard ones:

    NDVI = (NIR - Red) / (NIR + Red)
    NBR  = (NIR - SWIR) / (NIR + SWIR)
    BAI  = 1 / ((0.1 - Red)^2 + (0.06 - NIR)^2)
    dNBR = NBR_pre - NBR_post

Grids are immutable after construction (the value array is marked
read-only) so they are safe to share across workers; all operations here
return new grids.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping

import numpy as np

logger = logging.getLogger(__name__)

HEADER_KEYS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value")
HEADER_LABELS = ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "NODATA_value")

INDEX_BANDS = {
    "ndvi": ("nir", "red"),
    "nbr": ("nir", "swir"),
    "bai": ("red", "nir"),
}


class GridParseError(ValueError):
    """Malformed ASCII grid document. Carries 1-based line/row/col context."""

    def __init__(self, message, line=None, row=None, col=None):
        super().__init__(message)
        self.line = line
        self.row = row
        self.col = col


class GridHeaderError(GridParseError):
    """Missing, misnamed, or non-numeric header entry."""


class GridShapeError(GridParseError):
    """Row or column count does not match the declared header."""


class GridValueError(GridParseError):
    """Non-numeric cell in the data block."""


class GridCongruenceError(ValueError):
    """Grids that must share header geometry do not."""


class GridRangeError(ValueError):
    """Grid values outside the range their kind allows."""


@dataclass(frozen=True)
class RasterGrid:
    """Georeferenced 2-D single-band grid with a nodata sentinel.

    ``values`` is float64 with shape (nrows, ncols); row 0 is the top
    (northernmost) row, matching the file layout. Cells equal to
    ``nodata_sentinel`` (or NaN) are treated as missing everywhere.
    """

    ncols: int
    nrows: int
    x_origin: float
    y_origin: float
    cell_size: float
    nodata_sentinel: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.ncols < 1 or self.nrows < 1:
            raise ValueError(f"grid dimensions must be positive, got {self.ncols}x{self.nrows}")
        if not (self.cell_size > 0):
            raise ValueError(f"cell_size must be > 0, got {self.cell_size}")
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.size != self.ncols * self.nrows:
            raise ValueError(
                f"values length {arr.size} != ncols*nrows = {self.ncols * self.nrows}")
        arr = arr.reshape(self.nrows, self.ncols).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def cell_area_m2(self) -> float:
        return self.cell_size * self.cell_size

    def nodata_mask(self) -> np.ndarray:
        """Boolean array, True where the cell is missing."""
        return (self.values == self.nodata_sentinel) | np.isnan(self.values)

    def congruent(self, other: "RasterGrid") -> bool:
        """True when all header fields are identical."""
        return (
            self.ncols == other.ncols
            and self.nrows == other.nrows
            and self.x_origin == other.x_origin
            and self.y_origin == other.y_origin
            and self.cell_size == other.cell_size
            and _same_sentinel(self.nodata_sentinel, other.nodata_sentinel)
        )

    def with_values(self, values: np.ndarray) -> "RasterGrid":
        """New grid with the same header and different values."""
        return RasterGrid(self.ncols, self.nrows, self.x_origin, self.y_origin,
                          self.cell_size, self.nodata_sentinel, values)


@dataclass(frozen=True)
class GridPair:
    """Pre/post scene pair; construction enforces congruent headers."""

    pre: RasterGrid
    post: RasterGrid

    def __post_init__(self):
        if not self.pre.congruent(self.post):
            raise GridCongruenceError("pre and post grids have different headers")


def _same_sentinel(a: float, b: float) -> bool:
    return a == b or (np.isnan(a) and np.isnan(b))


def _format_number(v: float) -> str:
    """Shortest decimal that parses back to the same float64.

    Integral values are emitted without a fractional part, like GIS tools
    emit them; everything else uses repr, which keeps full precision.
    """
    f = float(v)
    if f.is_integer() and abs(f) < 1e16:
        return str(int(f))
    return repr(f)


def parse_grid(source: str | IO[str]) -> RasterGrid:
    """Parse an ASCII grid document into a RasterGrid.

    ``source`` is the document text or a readable text stream. Raises
    GridHeaderError / GridShapeError / GridValueError naming the offending
    1-based line (and row/column for data cells).
    """
    text = source if isinstance(source, str) else source.read()
    lines = text.splitlines()

    header: dict[str, float] = {}
    for i, key in enumerate(HEADER_KEYS):
        if i >= len(lines):
            raise GridHeaderError(f"line {i + 1}: missing header line '{key}'", line=i + 1)
        parts = lines[i].split()
        if len(parts) != 2:
            raise GridHeaderError(
                f"line {i + 1}: expected '<key> <value>', got {lines[i]!r}", line=i + 1)
        name, raw = parts
        if name.lower() != key:
            raise GridHeaderError(
                f"line {i + 1}: expected header key '{key}', got '{name}'", line=i + 1)
        try:
            header[key] = float(raw)
        except ValueError:
            raise GridHeaderError(
                f"line {i + 1}: non-numeric value {raw!r} for header '{name}'",
                line=i + 1) from None

    for key in ("ncols", "nrows"):
        if not header[key].is_integer() or header[key] < 1:
            raise GridHeaderError(f"header '{key}' must be a positive integer, "
                                  f"got {_format_number(header[key])}")
    ncols = int(header["ncols"])
    nrows = int(header["nrows"])
    if header["cellsize"] <= 0:
        raise GridHeaderError(f"header 'cellsize' must be > 0, got {header['cellsize']}")

    data_lines = [(idx, line) for idx, line in enumerate(lines[6:], start=7) if line.strip()]
    if len(data_lines) != nrows:
        raise GridShapeError(
            f"expected {nrows} data rows, found {len(data_lines)}",
            row=len(data_lines))

    values = np.empty((nrows, ncols), dtype=np.float64)
    for row_idx, (line_no, line) in enumerate(data_lines):
        tokens = line.split()
        if len(tokens) != ncols:
            raise GridShapeError(
                f"row {row_idx + 1} (line {line_no}): expected {ncols} values, "
                f"found {len(tokens)}",
                line=line_no, row=row_idx + 1, col=len(tokens))
        for col_idx, token in enumerate(tokens):
            try:
                values[row_idx, col_idx] = float(token)
            except ValueError:
                raise GridValueError(
                    f"row {row_idx + 1}, col {col_idx + 1} (line {line_no}): "
                    f"non-numeric cell {token!r}",
                    line=line_no, row=row_idx + 1, col=col_idx + 1) from None

    return RasterGrid(
        ncols=ncols,
        nrows=nrows,
        x_origin=header["xllcorner"],
        y_origin=header["yllcorner"],
        cell_size=header["cellsize"],
        nodata_sentinel=header["nodata_value"],
        values=values,
    )


def serialize_grid(grid: RasterGrid) -> str:
    """Render a grid as a canonical ASCII grid document.

    Values are written as the shortest decimal that round-trips the exact
    float64, so parse(serialize(parse(d))) reproduces every cell bit for
    bit. Single-space separation throughout.
    """
    out = [
        f"ncols {grid.ncols}",
        f"nrows {grid.nrows}",
        f"xllcorner {_format_number(grid.x_origin)}",
        f"yllcorner {_format_number(grid.y_origin)}",
        f"cellsize {_format_number(grid.cell_size)}",
        f"NODATA_value {_format_number(grid.nodata_sentinel)}",
    ]
    for row in grid.values:
        out.append(" ".join(_format_number(v) for v in row))
    return "\n".join(out) + "\n"


def write_grid(path, grid: RasterGrid) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_grid(grid))


def read_grid(path) -> RasterGrid:
    with open(path, "r", encoding="ascii") as fh:
        return parse_grid(fh)


def validate_range(grid: RasterGrid, lo: float, hi: float, what: str,
                   mode: str = "error") -> list[str]:
    """Check all non-nodata values lie in [lo, hi].

    ``mode`` is 'error' (raise GridRangeError), 'warn' (log and report),
    or 'off'. Returns the list of violation messages.
    """
    if mode not in ("error", "warn", "off"):
        raise ValueError(f"unknown range-check mode {mode!r}")
    if mode == "off":
        return []
    valid = ~grid.nodata_mask()
    bad = valid & ((grid.values < lo) | (grid.values > hi))
    if not bad.any():
        return []
    rows, cols = np.nonzero(bad)
    messages = [
        f"{what} value {grid.values[r, c]!r} at row {r + 1}, col {c + 1} "
        f"outside [{lo}, {hi}]"
        for r, c in zip(rows[:10], cols[:10])
    ]
    if len(rows) > 10:
        messages.append(f"... and {len(rows) - 10} more {what} cells outside [{lo}, {hi}]")
    if mode == "error":
        raise GridRangeError("; ".join(messages))
    for msg in messages:
        logger.warning(msg)
    return messages


def check_reflectance(grid: RasterGrid, mode: str = "error") -> list[str]:
    """Reflectance bands must lie in [0, 1]."""
    return validate_range(grid, 0.0, 1.0, "reflectance", mode)


def _require_congruent(grids: Iterable[RasterGrid], context: str) -> None:
    grids = list(grids)
    first = grids[0]
    for g in grids[1:]:
        if not first.congruent(g):
            raise GridCongruenceError(f"{context}: input grids have different headers")


def compute_index(kind: str, bands: Mapping[str, RasterGrid]) -> RasterGrid:
    """Compute a spectral index grid from named band grids.

    Required bands: NDVI needs nir+red, NBR needs nir+swir, BAI needs
    red+nir. Nodata in any input and singular (zero-denominator) pixels
    become nodata in the output.
    """
    kind = kind.lower()
    if kind not in INDEX_BANDS:
        raise ValueError(f"unknown index kind {kind!r}; expected one of {sorted(INDEX_BANDS)}")
    required = INDEX_BANDS[kind]
    missing = [name for name in required if name not in bands]
    if missing:
        raise ValueError(f"{kind} requires band(s) {missing}")
    grids = [bands[name] for name in required]
    _require_congruent(grids, f"compute_index({kind})")

    ref = grids[0]
    nodata = ref.nodata_mask()
    for g in grids[1:]:
        nodata = nodata | g.nodata_mask()

    with np.errstate(divide="ignore", invalid="ignore"):
        if kind == "ndvi":
            nir, red = grids[0].values, grids[1].values
            denom = nir + red
            out = (nir - red) / denom
        elif kind == "nbr":
            nir, swir = grids[0].values, grids[1].values
            denom = nir + swir
            out = (nir - swir) / denom
        else:  # bai
            red, nir = grids[0].values, grids[1].values
            denom = (0.1 - red) ** 2 + (0.06 - nir) ** 2
            out = 1.0 / denom
    singular = denom == 0.0
    out = np.where(nodata | singular, ref.nodata_sentinel, out)
    return ref.with_values(out)


def compute_dnbr(pair: GridPair) -> RasterGrid:
    """Per-pixel dNBR = NBR_pre - NBR_post; nodata propagates."""
    nodata = pair.pre.nodata_mask() | pair.post.nodata_mask()
    out = np.where(nodata, pair.pre.nodata_sentinel, pair.pre.values - pair.post.values)
    return pair.pre.with_values(out)
