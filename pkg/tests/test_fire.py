import numpy as np
import pytest

from pyroledger._kernels import _fallback
from pyroledger.fire import (BURNED, UNBURNED, UNKNOWN, BurnMask,
                             MaskValueError, classify_burn, extract_perimeters,
                             ingest_mask, mask_to_grid)
from .oracles import flood_fill_components
from .test_raster import make_grid

try:
    from pyroledger._kernels import _core
except ImportError:
    _core = None


def make_mask(pixels, cellsize=10.0):
    arr = np.array(pixels, dtype=np.int8)
    return BurnMask(ncols=arr.shape[1], nrows=arr.shape[0], x_origin=0.0,
                    y_origin=0.0, cell_size=cellsize, pixels=arr)


def random_mask(rng, max_side=32, p_burn=0.4):
    nrows = int(rng.integers(1, max_side + 1))
    ncols = int(rng.integers(1, max_side + 1))
    return make_mask((rng.uniform(size=(nrows, ncols)) < p_burn).astype(np.int8))


class TestClassify:
    def test_burned_above_threshold(self):
        mask = classify_burn(make_grid([[0.5]]), threshold=0.1)
        assert mask.pixels[0, 0] == BURNED

    def test_vacuous_threshold_all_unburned(self):
        mask = classify_burn(make_grid([[0.5, 1.3], [0.0, 0.9]]), threshold=2.0)
        assert np.all(mask.pixels == UNBURNED)

    def test_nodata_is_unknown_regardless_of_threshold(self):
        grid = make_grid([[-9999.0]])
        for threshold in (-1e9, 0.0, 1e9):
            assert classify_burn(grid, threshold).pixels[0, 0] == UNKNOWN

    def test_threshold_is_inclusive(self):
        assert classify_burn(make_grid([[0.1]]), 0.1).pixels[0, 0] == BURNED

    def test_lowering_threshold_never_shrinks_burned_set(self):
        rng = np.random.default_rng(3)
        grid = make_grid(rng.uniform(-0.5, 1.0, size=(16, 16)).tolist())
        thresholds = sorted(rng.uniform(-0.5, 1.0, size=6))
        previous = None
        for t in reversed(thresholds):  # descending thresholds grow the set
            burned = classify_burn(grid, t).pixels == BURNED
            if previous is not None:
                assert np.all(burned[previous])  # previous set is a subset
            previous = burned


class TestIngest:
    def test_direct_mapping(self):
        grid = make_grid([[1.0, 0.0], [-9999.0, 1.0]])
        mask = ingest_mask(grid)
        assert mask.pixels.tolist() == [[BURNED, UNBURNED], [UNKNOWN, BURNED]]

    def test_all_zero(self):
        assert np.all(ingest_mask(make_grid([[0.0, 0.0]])).pixels == UNBURNED)

    def test_invalid_value_lists_cells(self):
        grid = make_grid([[1.0, 0.5]])
        with pytest.raises(MaskValueError, match=r"\(0,1\)=0.5") as err:
            ingest_mask(grid)
        assert err.value.cells == [(0, 1, 0.5)]

    def test_round_trip_through_grid(self):
        mask = make_mask([[1, 0], [2, 1]])
        back = ingest_mask(mask_to_grid(mask))
        assert back.pixels.tolist() == mask.pixels.tolist()


class TestPerimeters:
    def test_two_components(self):
        mask = make_mask([[1, 1, 0], [0, 0, 0], [0, 0, 1]])
        perimeters = extract_perimeters(mask)
        assert [p.pixel_count for p in perimeters] == [2, 1]
        assert perimeters[0].pixel_set == [(0, 0), (0, 1)]
        assert perimeters[1].pixel_set == [(2, 2)]
        assert perimeters[0].bounding_box == (0, 0, 0, 1)

    def test_all_unburned_empty(self):
        assert extract_perimeters(make_mask([[0, 0], [0, 0]])) == []

    def test_single_pixel_area(self):
        perimeters = extract_perimeters(make_mask([[1]], cellsize=10.0))
        assert len(perimeters) == 1
        assert perimeters[0].area_m2 == 100.0

    def test_component_ids_and_ordering(self):
        # Components: size-3 at rows 2-4 col 0, size-1 at (0, 4), size-3 at row 0.
        mask = make_mask([
            [1, 1, 1, 0, 1],
            [0, 0, 0, 0, 0],
            [1, 0, 0, 0, 0],
            [1, 0, 0, 0, 0],
            [1, 0, 0, 0, 0],
        ])
        perimeters = extract_perimeters(mask)
        assert [p.component_id for p in perimeters] == [1, 2, 3]
        assert [p.pixel_count for p in perimeters] == [3, 3, 1]
        # Equal sizes tie-break by (row_min, col_min): row 0 component first.
        assert perimeters[0].bounding_box == (0, 0, 0, 2)
        assert perimeters[1].bounding_box == (2, 0, 4, 0)

    def test_diagonal_needs_8_connectivity(self):
        mask = make_mask([[1, 0], [0, 1]])
        assert len(extract_perimeters(mask, connectivity=4)) == 2
        assert len(extract_perimeters(mask, connectivity=8)) == 1

    def test_unknown_pixels_never_join(self):
        mask = make_mask([[1, 2, 1]])
        perimeters = extract_perimeters(mask)
        assert [p.pixel_count for p in perimeters] == [1, 1]
        assert mask.unknown_count == 1
        assert mask.unknown_area_m2 == 100.0

    def test_matches_flood_fill_oracle_on_random_masks(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            mask = random_mask(rng)
            got = {frozenset(p.pixel_set) for p in extract_perimeters(mask)}
            want = flood_fill_components((mask.pixels == BURNED).tolist())
            assert got == want

    def test_partition_and_area_additivity(self):
        rng = np.random.default_rng(99)
        for _ in range(20):
            mask = random_mask(rng)
            perimeters = extract_perimeters(mask)
            seen = set()
            for p in perimeters:
                for px in p.pixel_set:
                    assert px not in seen
                    assert mask.pixels[px] == BURNED
                    seen.add(px)
            assert len(seen) == mask.burned_count
            total = sum(p.area_m2 for p in perimeters)
            assert total == pytest.approx(mask.burned_count * mask.cell_area_m2)


@pytest.mark.skipif(_core is None, reason="compiled kernels not built")
class TestKernelBackends:
    def test_label_components_identical(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            nrows, ncols = int(rng.integers(1, 40)), int(rng.integers(1, 40))
            binary = (rng.uniform(size=(nrows, ncols)) < 0.45).astype(np.uint8)
            for connectivity in (4, 8):
                fast, nf = _core.label_components(binary, connectivity)
                slow, ns = _fallback.label_components(binary, connectivity)
                assert nf == ns
                np.testing.assert_array_equal(fast, slow)

    def test_severity_loss_sum_bit_identical(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            n = int(rng.integers(1, 30))
            pre = rng.uniform(0, 30, size=(8, 8))
            pre[rng.uniform(size=(8, 8)) < 0.1] = -9999.0
            dnbr = rng.uniform(-0.5, 1.5, size=(8, 8))
            rows = rng.integers(0, 8, size=n).astype(np.int64)
            cols = rng.integers(0, 8, size=n).astype(np.int64)
            bounds = np.array([0.1, 0.27, 0.44, 0.66])
            fracs = np.array([0.2, 0.4, 0.6, 0.8])
            fast = _core.severity_loss_sum(pre, dnbr, rows, cols, bounds, fracs,
                                           -9999.0, -9999.0)
            slow = _fallback.severity_loss_sum(pre, dnbr, rows, cols, bounds, fracs,
                                               -9999.0, -9999.0)
            assert fast[0] == slow[0]  # bit-identical, not approx
            assert fast[1] == slow[1]
