"""Biomass, carbon stock, burn severity, and fire emissions quantification.

Aboveground biomass follows the per-class power law a*(NDVI - b)^c with
AGB clamped to 0 where NDVI <= b (the power law is undefined there and
biomass cannot be negative). Carbon stock is AGB times the class carbon
fraction. Burn severity maps dNBR to a combustion fraction through a
config-supplied table: thresholds and fractions vary by vegetation type
and region, so they are never hardcoded.

The default emissions pathway multiplies pre-fire carbon stock by the
per-pixel combustion fraction; an NDVI-delta pathway (pre minus post
stock) is also exposed for scenes where a post-fire NDVI is trusted.
Carbon mass converts to CO2 at 44/12 kg per kg C, and non-CO2 species
(CH4, N2O) enter as a share of total CO2e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import _kernels
from .fire import FirePerimeter
from .raster import GridCongruenceError, RasterGrid

CO2_PER_KG_CARBON = 44.0 / 12.0

SHARE_OF_TOTAL = "share_of_total"
ADDITIVE = "additive"
_CONVENTIONS = (SHARE_OF_TOTAL, ADDITIVE)


class UnknownClassError(ValueError):
    """Class map references a class_id absent from the vegetation table."""

    def __init__(self, class_id):
        super().__init__(f"class_id {class_id} is not in the vegetation class table")
        self.class_id = class_id


@dataclass(frozen=True)
class VegetationClass:
    """Per-class biomass power-law coefficients and carbon fraction."""

    class_id: int
    name: str
    agb_a: float
    agb_b: float
    agb_c: float
    carbon_fraction: float

    def __post_init__(self):
        for label, v in (("agb_a", self.agb_a), ("agb_b", self.agb_b), ("agb_c", self.agb_c)):
            if not math.isfinite(v):
                raise ValueError(f"{self.name}: coefficient {label} must be finite, got {v}")
        if self.agb_a < 0:
            raise ValueError(f"{self.name}: agb_a must be >= 0, got {self.agb_a}")
        if not 0.0 <= self.carbon_fraction <= 1.0:
            raise ValueError(
                f"{self.name}: carbon_fraction must be in [0, 1], got {self.carbon_fraction}")


@dataclass(frozen=True)
class SeverityLevel:
    lower_dnbr: float
    label: str
    combustion_fraction: float


#: Returned for dNBR below the first table bound.
UNBURNED_LEVEL = SeverityLevel(lower_dnbr=-math.inf, label="unburned", combustion_fraction=0.0)


@dataclass(frozen=True)
class SeverityTable:
    """Ordered dNBR severity bins with non-decreasing combustion fractions."""

    levels: tuple[SeverityLevel, ...]

    def __post_init__(self):
        if not self.levels:
            raise ValueError("severity table must have at least one level")
        levels = tuple(self.levels)
        for prev, cur in zip(levels, levels[1:]):
            if not cur.lower_dnbr > prev.lower_dnbr:
                raise ValueError(
                    f"severity thresholds must be strictly increasing; "
                    f"{cur.label} ({cur.lower_dnbr}) follows {prev.label} ({prev.lower_dnbr})")
            if cur.combustion_fraction < prev.combustion_fraction:
                raise ValueError(
                    f"combustion fractions must be non-decreasing with severity; "
                    f"{cur.label} ({cur.combustion_fraction}) follows "
                    f"{prev.label} ({prev.combustion_fraction})")
        for level in levels:
            if not 0.0 <= level.combustion_fraction <= 1.0:
                raise ValueError(
                    f"{level.label}: combustion_fraction must be in [0, 1], "
                    f"got {level.combustion_fraction}")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping]) -> "SeverityTable":
        return cls(tuple(
            SeverityLevel(float(r["lower_dnbr"]), str(r["label"]), float(r["combustion_fraction"]))
            for r in rows
        ))

    def bounds(self) -> np.ndarray:
        return np.array([lv.lower_dnbr for lv in self.levels], dtype=np.float64)

    def fractions(self) -> np.ndarray:
        return np.array([lv.combustion_fraction for lv in self.levels], dtype=np.float64)


@dataclass(frozen=True)
class EmissionsEstimate:
    """Carbon loss with its CO2 and CO2e conversions.

    ``convention`` controls how the non-CO2 share enters: 'share_of_total'
    reads the share as a fraction of total CO2e (total = CO2 / (1 - f),
    the default), 'additive' adds it on top (total = CO2 * (1 + f)).
    """

    carbon_loss_kgC: float
    co2_kg: float
    co2e_total_kg: float
    non_co2_share: float
    convention: str = SHARE_OF_TOTAL
    skipped_pixels: int = 0

    @classmethod
    def from_carbon_loss(cls, carbon_loss_kgC: float, non_co2_share: float,
                         convention: str = SHARE_OF_TOTAL,
                         skipped_pixels: int = 0) -> "EmissionsEstimate":
        if carbon_loss_kgC < 0:
            raise ValueError(f"carbon loss must be >= 0, got {carbon_loss_kgC}")
        if not 0.0 <= non_co2_share < 0.5:
            raise ValueError(f"non_co2_share must be in [0, 0.5), got {non_co2_share}")
        if convention not in _CONVENTIONS:
            raise ValueError(f"unknown CO2e convention {convention!r}")
        co2 = carbon_loss_kgC * 44.0 / 12.0
        if convention == SHARE_OF_TOTAL:
            co2e = co2 / (1.0 - non_co2_share)
        else:
            co2e = co2 * (1.0 + non_co2_share)
        return cls(carbon_loss_kgC, co2, co2e, non_co2_share, convention, skipped_pixels)

    @property
    def co2e_total_tCO2e(self) -> float:
        return self.co2e_total_kg / 1000.0


def agb_from_ndvi(ndvi: float, veg_class: VegetationClass) -> float:
    """Aboveground biomass (kg/m^2) for one NDVI value; 0 at or below b."""
    if not -1.0 <= ndvi <= 1.0:
        raise ValueError(f"ndvi must be in [-1, 1], got {ndvi}")
    if ndvi <= veg_class.agb_b:
        return 0.0
    return veg_class.agb_a * (ndvi - veg_class.agb_b) ** veg_class.agb_c


def carbon_stock_map(ndvi: RasterGrid, class_map: RasterGrid,
                     classes: Mapping[int, VegetationClass]) -> RasterGrid:
    """Per-pixel carbon stock (kg C/m^2) = AGB(NDVI; class) * carbon fraction.

    Nodata in either input propagates. Raises UnknownClassError for any
    class_id in the map that the table does not define.
    """
    if not ndvi.congruent(class_map):
        raise GridCongruenceError("ndvi and class_map grids have different headers")
    nodata = ndvi.nodata_mask() | class_map.nodata_mask()
    class_values = class_map.values

    present = np.unique(class_values[~nodata])
    for cv in present:
        if not float(cv).is_integer():
            raise UnknownClassError(float(cv))
        if int(cv) not in classes:
            raise UnknownClassError(int(cv))

    out = np.zeros_like(ndvi.values)
    for cv in present:
        veg = classes[int(cv)]
        sel = (class_values == cv) & ~nodata
        shifted = ndvi.values - veg.agb_b
        with np.errstate(invalid="ignore"):
            agb = np.where(shifted > 0, veg.agb_a * np.power(shifted, veg.agb_c), 0.0)
        out[sel] = agb[sel] * veg.carbon_fraction
    out[nodata] = ndvi.nodata_sentinel
    return ndvi.with_values(out)


def carbon_delta(pre_stock: RasterGrid, post_stock: RasterGrid) -> RasterGrid:
    """Pre minus post carbon stock; nodata propagates."""
    if not pre_stock.congruent(post_stock):
        raise GridCongruenceError("pre and post carbon grids have different headers")
    nodata = pre_stock.nodata_mask() | post_stock.nodata_mask()
    out = np.where(nodata, pre_stock.nodata_sentinel, pre_stock.values - post_stock.values)
    return pre_stock.with_values(out)


def severity_of(dnbr: float, table: SeverityTable) -> SeverityLevel:
    """Level with the greatest lower_dnbr <= dnbr; UNBURNED_LEVEL below all."""
    chosen = UNBURNED_LEVEL
    for level in table.levels:
        if dnbr >= level.lower_dnbr:
            chosen = level
        else:
            break
    return chosen


def severity_histogram(perimeter: FirePerimeter, dnbr: RasterGrid,
                       table: SeverityTable) -> dict[str, int]:
    """Pixel counts per severity label over a perimeter."""
    counts: dict[str, int] = {}
    nodata = dnbr.nodata_mask()
    for r, c in perimeter.pixel_set:
        label = "unknown" if nodata[r, c] else severity_of(float(dnbr.values[r, c]), table).label
        counts[label] = counts.get(label, 0) + 1
    return counts


def _check_bounds(perimeter: FirePerimeter, grid: RasterGrid) -> None:
    for r, c in perimeter.pixel_set:
        if not (0 <= r < grid.nrows and 0 <= c < grid.ncols):
            raise IndexError(
                f"perimeter pixel ({r}, {c}) outside grid of shape {grid.shape}")


def fire_emissions(perimeter: FirePerimeter, pre_carbon: RasterGrid,
                   dnbr: RasterGrid, table: SeverityTable,
                   non_co2_share: float,
                   convention: str = SHARE_OF_TOTAL) -> EmissionsEstimate:
    """Severity-pathway emissions for one fire.

    carbon_loss = sum over perimeter pixels of
    pre_carbon * combustion_fraction(severity_of(dnbr)) * cell_area.
    Pixels with nodata in either grid contribute nothing and are counted
    in ``skipped_pixels``. The accumulation order is fixed (the perimeter's
    row-major pixel list), so results are bit-reproducible.
    """
    if not pre_carbon.congruent(dnbr):
        raise GridCongruenceError("pre_carbon and dnbr grids have different headers")
    _check_bounds(perimeter, pre_carbon)
    if perimeter.pixel_set:
        rows = np.array([p[0] for p in perimeter.pixel_set], dtype=np.int64)
        cols = np.array([p[1] for p in perimeter.pixel_set], dtype=np.int64)
        density, skipped = _kernels.severity_loss_sum(
            pre_carbon.values, dnbr.values, rows, cols,
            table.bounds(), table.fractions(),
            pre_carbon.nodata_sentinel, dnbr.nodata_sentinel)
    else:
        density, skipped = 0.0, 0
    carbon_loss = density * pre_carbon.cell_area_m2
    return EmissionsEstimate.from_carbon_loss(carbon_loss, non_co2_share, convention,
                                              skipped_pixels=int(skipped))


def fire_emissions_from_delta(perimeter: FirePerimeter, delta: RasterGrid,
                              non_co2_share: float,
                              convention: str = SHARE_OF_TOTAL) -> EmissionsEstimate:
    """NDVI-delta pathway: sum positive pre-minus-post stock over the fire.

    Negative per-pixel deltas (char artifacts, regrowth) clamp to 0 so
    they cannot offset combustion elsewhere in the perimeter.
    """
    _check_bounds(perimeter, delta)
    nodata = delta.nodata_mask()
    total = 0.0
    skipped = 0
    for r, c in perimeter.pixel_set:
        if nodata[r, c]:
            skipped += 1
            continue
        d = float(delta.values[r, c])
        if d > 0:
            total += d
    carbon_loss = total * delta.cell_area_m2
    return EmissionsEstimate.from_carbon_loss(carbon_loss, non_co2_share, convention,
                                              skipped_pixels=skipped)
