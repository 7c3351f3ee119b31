"""
Hilbert curve over the 2D cell grid.

Convention: traversal starts at (0, 0) and the order-1 visit sequence is
(0,0) -> (0,1) -> (1,1) -> (1,0). Every aligned 2^k x 2^k block of the grid is
visited as one contiguous run of indices, which is what the range
decomposition and the tree's node spans rely on.
"""

from dataclasses import dataclass
from typing import Iterable, List, Set, Tuple, Union

import numpy as np

from src.errors import DomainError

MAX_ORDER = 16


@dataclass(frozen=True, slots=True)
class HilbertIndex:
    value: int
    order: int

    def __post_init__(self):
        _check_order(self.order)
        if not 0 <= self.value < (1 << (2 * self.order)):
            raise DomainError(f"Hilbert index {self.value} out of range for order {self.order}")

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True, slots=True)
class HilbertRange:
    """Inclusive run [lo, hi] of Hilbert indices."""

    lo: int
    hi: int

    def __post_init__(self):
        if self.lo < 0 or self.lo > self.hi:
            raise DomainError(f"invalid Hilbert range ({self.lo}, {self.hi})")

    def __len__(self) -> int:
        return self.hi - self.lo + 1

    def __contains__(self, h: int) -> bool:
        return self.lo <= h <= self.hi

    def overlaps(self, lo: int, hi: int) -> bool:
        return self.lo <= hi and lo <= self.hi


@dataclass(frozen=True, slots=True)
class CellRect:
    """Inclusive rectangle of grid cells [cx_lo..cx_hi] x [cy_lo..cy_hi]."""

    cx_lo: int
    cx_hi: int
    cy_lo: int
    cy_hi: int

    @property
    def cell_count(self) -> int:
        return (self.cx_hi - self.cx_lo + 1) * (self.cy_hi - self.cy_lo + 1)

    def contains(self, cx: int, cy: int) -> bool:
        return self.cx_lo <= cx <= self.cx_hi and self.cy_lo <= cy <= self.cy_hi


def _check_order(order: int) -> None:
    if not isinstance(order, (int, np.integer)) or not 1 <= order <= MAX_ORDER:
        raise DomainError(f"curve order must be in [1, {MAX_ORDER}], got {order!r}")


def _check_rect(rect: CellRect, order: int) -> None:
    _check_order(order)
    side = 1 << order
    if rect.cx_lo > rect.cx_hi or rect.cy_lo > rect.cy_hi:
        raise DomainError(f"empty or inverted cell rectangle {rect}")
    if rect.cx_lo < 0 or rect.cy_lo < 0 or rect.cx_hi >= side or rect.cy_hi >= side:
        raise DomainError(f"cell rectangle {rect} exceeds the order-{order} grid")


def _xy2d(x: int, y: int, order: int) -> int:
    n = 1 << order
    d = 0
    s = n >> 1
    while s:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        if not ry:
            if rx:
                x = n - 1 - x
                y = n - 1 - y
            x, y = y, x
        s >>= 1
    return d


def _d2xy(d: int, order: int) -> Tuple[int, int]:
    n = 1 << order
    x = y = 0
    s = 1
    while s < n:
        rx = 1 & (d >> 1)
        ry = 1 & (d ^ rx)
        if not ry:
            if rx:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        d >>= 2
        s <<= 1
    return x, y


def hilbert_encode(cx: int, cy: int, order: int) -> HilbertIndex:
    """Position of cell (cx, cy) along the order-`order` Hilbert traversal."""
    _check_order(order)
    side = 1 << order
    if not (0 <= cx < side and 0 <= cy < side):
        raise DomainError(f"cell ({cx}, {cy}) outside the order-{order} grid")
    return HilbertIndex(_xy2d(int(cx), int(cy), order), order)


def hilbert_decode(h: Union[HilbertIndex, int], order: int) -> Tuple[int, int]:
    """Inverse of hilbert_encode: the (cx, cy) cell visited at index h."""
    _check_order(order)
    if isinstance(h, HilbertIndex):
        if h.order != order:
            raise DomainError(f"index has order {h.order}, expected {order}")
        h = h.value
    if not 0 <= h < (1 << (2 * order)):
        raise DomainError(f"Hilbert index {h} out of range for order {order}")
    return _d2xy(int(h), order)


def hilbert_encode_array(cx: np.ndarray, cy: np.ndarray, order: int) -> np.ndarray:
    """Vectorised hilbert_encode; inputs are assumed to lie on the grid."""
    _check_order(order)
    x = np.asarray(cx, dtype=np.int64).copy()
    y = np.asarray(cy, dtype=np.int64).copy()
    n = 1 << order
    d = np.zeros(x.shape, dtype=np.int64)
    s = n >> 1
    while s:
        rx = (x & s) > 0
        ry = (y & s) > 0
        d += (s * s) * ((3 * rx.astype(np.int64)) ^ ry.astype(np.int64))
        flip = rx & ~ry
        x = np.where(flip, n - 1 - x, x)
        y = np.where(flip, n - 1 - y, y)
        swap = ~ry
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        s >>= 1
    return d


def hilbert_decode_array(h: np.ndarray, order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised hilbert_decode."""
    _check_order(order)
    t = np.asarray(h, dtype=np.int64).copy()
    x = np.zeros(t.shape, dtype=np.int64)
    y = np.zeros(t.shape, dtype=np.int64)
    n = 1 << order
    s = 1
    while s < n:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x = x + s * rx
        y = y + s * ry
        t >>= 2
        s <<= 1
    return x, y


def block_span(cx: int, cy: int, depth: int, order: int) -> Tuple[int, int]:
    """Hilbert run at `order` covered by the aligned block (cx, cy) of level `depth`.

    The block is the 2^(order-depth) square of order-`order` cells under cell
    (cx, cy) of the coarser grid.
    """
    width = 1 << (2 * (order - depth))
    if depth == 0:
        return 0, width - 1
    lo = _xy2d(cx, cy, depth) * width
    return lo, lo + width - 1


def coalesce_regions(values: Iterable[int]) -> List[HilbertRange]:
    """Maximal contiguous runs covering exactly `values`, ascending."""
    ranges: List[HilbertRange] = []
    lo = hi = None
    for h in sorted(set(int(v) for v in values)):
        if hi is not None and h == hi + 1:
            hi = h
            continue
        if lo is not None:
            ranges.append(HilbertRange(lo, hi))
        lo = hi = h
    if lo is not None:
        ranges.append(HilbertRange(lo, hi))
    return ranges


def _quadrant_ranges(rect: CellRect, order: int) -> List[HilbertRange]:
    # Blocks carry the orientation of the curve inside them as (swap, flip):
    # swap exchanges the axes, flip complements both. Children are visited in
    # curve order, so the output comes out sorted and adjacent runs merge.
    runs: List[List[int]] = []

    def emit(lo: int, hi: int) -> None:
        if runs and runs[-1][1] + 1 == lo:
            runs[-1][1] = hi
        else:
            runs.append([lo, hi])

    def visit(x0: int, y0: int, size: int, base: int, swap: bool, flip: bool) -> None:
        x1 = x0 + size - 1
        y1 = y0 + size - 1
        if x1 < rect.cx_lo or x0 > rect.cx_hi or y1 < rect.cy_lo or y0 > rect.cy_hi:
            return
        if rect.cx_lo <= x0 and x1 <= rect.cx_hi and rect.cy_lo <= y0 and y1 <= rect.cy_hi:
            emit(base, base + size * size - 1)
            return
        half = size >> 1
        children = []
        for bx in (0, 1):
            for by in (0, 1):
                tx, ty = (by, bx) if swap else (bx, by)
                if flip:
                    tx ^= 1
                    ty ^= 1
                quad = (3 * tx) ^ ty
                child_swap, child_flip = swap, flip
                if not ty:
                    child_swap = not swap
                    if tx:
                        child_flip = not flip
                children.append((quad, x0 + bx * half, y0 + by * half, child_swap, child_flip))
        children.sort()
        for quad, cx, cy, child_swap, child_flip in children:
            visit(cx, cy, half, base + quad * half * half, child_swap, child_flip)

    visit(0, 0, 1 << order, 0, False, False)
    return [HilbertRange(lo, hi) for lo, hi in runs]


def _boundary_ranges(rect: CellRect, order: int) -> List[HilbertRange]:
    # Consecutive indices are neighbouring cells, so a run can only start or
    # end on the rectangle's border ring. Encode the ring, then keep the cells
    # whose predecessor (successor) falls outside the rectangle.
    xs_row = np.arange(rect.cx_lo, rect.cx_hi + 1, dtype=np.int64)
    ys_col = np.arange(rect.cy_lo, rect.cy_hi + 1, dtype=np.int64)
    xs = np.concatenate([
        xs_row,
        xs_row,
        np.full(ys_col.shape, rect.cx_lo, dtype=np.int64),
        np.full(ys_col.shape, rect.cx_hi, dtype=np.int64),
    ])
    ys = np.concatenate([
        np.full(xs_row.shape, rect.cy_lo, dtype=np.int64),
        np.full(xs_row.shape, rect.cy_hi, dtype=np.int64),
        ys_col,
        ys_col,
    ])
    h = np.unique(hilbert_encode_array(xs, ys, order))
    last = (1 << (2 * order)) - 1

    def inside(values: np.ndarray) -> np.ndarray:
        px, py = hilbert_decode_array(values, order)
        return (px >= rect.cx_lo) & (px <= rect.cx_hi) & (py >= rect.cy_lo) & (py <= rect.cy_hi)

    prev_inside = (h > 0) & inside(np.maximum(h - 1, 0))
    next_inside = (h < last) & inside(np.minimum(h + 1, last))
    starts = h[~prev_inside]
    ends = h[~next_inside]
    return [HilbertRange(int(lo), int(hi)) for lo, hi in zip(starts, ends)]


def hilbert_ranges(rect: CellRect, order: int, method: str = "boundary") -> List[HilbertRange]:
    """Sorted maximal Hilbert runs covering exactly the cells of `rect`.

    method:
        "cells"     encode every cell, then coalesce (reference)
        "quadrant"  recurse over aligned blocks, emitting whole runs for contained ones
        "boundary"  vectorised scan of the border ring only
    """
    _check_rect(rect, order)
    if method == "cells":
        return coalesce_regions(get_hilbert_values(rect, order))
    if method == "quadrant":
        return _quadrant_ranges(rect, order)
    if method == "boundary":
        return _boundary_ranges(rect, order)
    raise DomainError(f"unknown decomposition method {method!r}")


def get_hilbert_values(rect: CellRect, order: int, fast: bool = False) -> Set[int]:
    """Hilbert index values of every cell inside `rect`.

    With fast=True the set is expanded from the quadrant decomposition instead
    of encoding cell by cell; both give the same set.
    """
    _check_rect(rect, order)
    if fast:
        return {h for r in _quadrant_ranges(rect, order) for h in range(r.lo, r.hi + 1)}
    return {
        _xy2d(cx, cy, order)
        for cx in range(rect.cx_lo, rect.cx_hi + 1)
        for cy in range(rect.cy_lo, rect.cy_hi + 1)
    }
