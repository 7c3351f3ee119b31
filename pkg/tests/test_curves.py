import numpy as np
import pytest

from src.curves import (
    CellCoord,
    CellRect,
    HilbertIndex,
    HilbertRange,
    MortonKey,
    block_span,
    coalesce_regions,
    get_hilbert_values,
    hilbert_decode,
    hilbert_decode_array,
    hilbert_encode,
    hilbert_encode_array,
    hilbert_ranges,
    morton3_decode,
    morton3_encode,
    octant_of,
)
from src.errors import DomainError


# -- Hilbert encode / decode ---------------------------------------------------------


def test_order_one_visit_sequence():
    """Test the fixed orientation: (0,0) -> (0,1) -> (1,1) -> (1,0)."""
    assert [hilbert_decode(h, 1) for h in range(4)] == [(0, 0), (0, 1), (1, 1), (1, 0)]
    assert hilbert_encode(0, 0, 1).value == 0
    assert hilbert_encode(1, 0, 1).value == 3
    assert hilbert_encode(0, 0, 8).value == 0


def test_order_two_corners():
    assert hilbert_encode(1, 0, 2).value == 1
    assert hilbert_encode(3, 0, 2).value == 15
    assert hilbert_decode(HilbertIndex(3, 1), 1) == (1, 0)


@pytest.mark.parametrize("order", range(1, 9))
def test_hilbert_bijective_and_adjacent(order):
    """Test every index maps to a distinct cell and consecutive cells are grid neighbours."""
    h = np.arange(1 << (2 * order), dtype=np.int64)
    xs, ys = hilbert_decode_array(h, order)
    assert len(set(zip(xs.tolist(), ys.tolist()))) == len(h), "decode must be a bijection"
    steps = np.abs(np.diff(xs)) + np.abs(np.diff(ys))
    assert np.all(steps == 1), "consecutive indices must be Manhattan neighbours"
    assert np.array_equal(hilbert_encode_array(xs, ys, order), h)


@pytest.mark.parametrize("order", range(1, 6))
def test_scalar_matches_vectorised(order):
    for h in range(1 << (2 * order)):
        cx, cy = hilbert_decode(h, order)
        assert hilbert_encode(cx, cy, order).value == h
    xs, ys = hilbert_decode_array(np.arange(1 << (2 * order)), order)
    assert [hilbert_decode(h, order) for h in range(1 << (2 * order))] == list(zip(xs.tolist(), ys.tolist()))


def test_hilbert_roundtrip_order_16():
    rng = np.random.default_rng(1)
    h = rng.integers(0, 1 << 32, 100_000, dtype=np.int64)
    xs, ys = hilbert_decode_array(h, 16)
    assert np.array_equal(hilbert_encode_array(xs, ys, 16), h)
    for value in h[:2000].tolist():
        cx, cy = hilbert_decode(value, 16)
        assert hilbert_encode(cx, cy, 16).value == value


def test_hilbert_errors():
    with pytest.raises(DomainError):
        hilbert_encode(2, 0, 1)
    with pytest.raises(DomainError):
        hilbert_encode(-1, 0, 4)
    with pytest.raises(DomainError):
        hilbert_encode(0, 0, 0)
    with pytest.raises(DomainError):
        hilbert_decode(4, 1)
    with pytest.raises(DomainError):
        hilbert_decode(HilbertIndex(3, 2), 1)
    with pytest.raises(DomainError):
        HilbertRange(5, 4)


# -- range decomposition ---------------------------------------------------------------


def test_get_hilbert_values_examples():
    assert get_hilbert_values(CellRect(0, 1, 0, 1), 1) == {0, 1, 2, 3}
    assert get_hilbert_values(CellRect(1, 1, 0, 0), 1) == {3}
    rect = CellRect(1, 2, 0, 0)
    assert get_hilbert_values(rect, 2) == {hilbert_encode(1, 0, 2).value, hilbert_encode(2, 0, 2).value}


def test_get_hilbert_values_rejects_bad_rect():
    with pytest.raises(DomainError):
        get_hilbert_values(CellRect(2, 1, 0, 0), 2)
    with pytest.raises(DomainError):
        get_hilbert_values(CellRect(0, 4, 0, 0), 2)


def test_coalesce_regions_examples():
    assert coalesce_regions(set()) == []
    assert coalesce_regions({0, 1, 2, 3}) == [HilbertRange(0, 3)]
    assert coalesce_regions({1, 2, 5}) == [HilbertRange(1, 2), HilbertRange(5, 5)]


def test_decomposition_methods_agree():
    """Test the three decomposition methods return identical sorted maximal runs."""
    rng = np.random.default_rng(3)
    order = 6
    side = 1 << order
    for _ in range(200):
        x0, x1 = sorted(rng.integers(0, side, 2).tolist())
        y0, y1 = sorted(rng.integers(0, side, 2).tolist())
        rect = CellRect(x0, x1, y0, y1)
        reference = hilbert_ranges(rect, order, method="cells")
        assert hilbert_ranges(rect, order, method="quadrant") == reference, rect
        assert hilbert_ranges(rect, order, method="boundary") == reference, rect
        assert sum(len(r) for r in reference) == rect.cell_count
        assert get_hilbert_values(rect, order, fast=True) == get_hilbert_values(rect, order)


def test_decomposition_full_grid_and_single_cell():
    for method in ("cells", "quadrant", "boundary"):
        assert hilbert_ranges(CellRect(0, 15, 0, 15), 4, method=method) == [HilbertRange(0, 255)]
        h = hilbert_encode(5, 9, 4).value
        assert hilbert_ranges(CellRect(5, 5, 9, 9), 4, method=method) == [HilbertRange(h, h)]


def test_decomposition_large_order_boundary_matches_quadrant():
    rect = CellRect(1000, 4931, 20000, 23931)
    assert hilbert_ranges(rect, 16, method="boundary") == hilbert_ranges(rect, 16, method="quadrant")


def test_unknown_method():
    with pytest.raises(DomainError):
        hilbert_ranges(CellRect(0, 0, 0, 0), 2, method="zigzag")


def test_block_span_is_contiguous():
    """Test an aligned block's cells occupy exactly its Hilbert span."""
    order = 5
    for depth in range(0, order + 1):
        side = 1 << depth
        for cx in range(side):
            for cy in range(side):
                lo, hi = block_span(cx, cy, depth, order)
                shift = order - depth
                rect = CellRect(cx << shift, ((cx + 1) << shift) - 1, cy << shift, ((cy + 1) << shift) - 1)
                assert get_hilbert_values(rect, order) == set(range(lo, hi + 1))


# -- Morton -------------------------------------------------------------------------------


def test_morton_examples():
    assert morton3_encode(CellCoord(0, 0, 0, 1)).value == 0
    assert morton3_encode(CellCoord(1, 1, 1, 1)).value == 7
    assert morton3_encode(CellCoord(1, 0, 0, 1)).value == 1
    assert morton3_encode(CellCoord(0, 1, 0, 1)).value == 2
    assert morton3_encode(CellCoord(0, 0, 1, 1)).value == 4
    assert morton3_decode(MortonKey(0, 3)) == CellCoord(0, 0, 0, 3)
    assert morton3_decode(MortonKey(7, 1)) == CellCoord(1, 1, 1, 1)


def test_morton_roundtrip_depth_16():
    rng = np.random.default_rng(2)
    for value in rng.integers(0, 1 << 48, 100_000, dtype=np.int64).tolist():
        key = MortonKey(value, 16)
        assert morton3_encode(morton3_decode(key)) == key


def test_morton_errors():
    with pytest.raises(DomainError):
        CellCoord(2, 0, 0, 1)
    with pytest.raises(DomainError):
        CellCoord(0, 0, 0, 17)
    with pytest.raises(DomainError):
        MortonKey(8, 1)


def test_child_follows_octant_of():
    rng = np.random.default_rng(4)
    for cx, cy, ct in rng.integers(0, 1 << 16, (200, 3)).tolist():
        cell = CellCoord(0, 0, 0, 0)
        for depth in range(16):
            cell = cell.child(octant_of(cx, cy, ct, 15 - depth))
        assert cell == CellCoord(cx, cy, ct, 16)
