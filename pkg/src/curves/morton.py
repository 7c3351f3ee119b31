"""
3D Morton (Z-order) keys for octree cells.

Bit order per level is (t, y, x) with x least significant, coarsest level
first; the index file format depends on it staying fixed.
"""

from dataclasses import dataclass

from src.curves.hilbert import MAX_ORDER
from src.errors import DomainError


@dataclass(frozen=True, slots=True)
class CellCoord:
    """Quantised (x, y, t) cell at a subdivision level."""

    cx: int
    cy: int
    ct: int
    depth: int

    def __post_init__(self):
        if not 0 <= self.depth <= MAX_ORDER:
            raise DomainError(f"depth must be in [0, {MAX_ORDER}], got {self.depth}")
        side = 1 << self.depth
        if not (0 <= self.cx < side and 0 <= self.cy < side and 0 <= self.ct < side):
            raise DomainError(f"cell ({self.cx}, {self.cy}, {self.ct}) does not fit in {self.depth} bits")

    def child(self, octant: int) -> "CellCoord":
        """Cell one level down in the given octant (octant bits are t, y, x)."""
        return CellCoord(
            (self.cx << 1) | (octant & 1),
            (self.cy << 1) | ((octant >> 1) & 1),
            (self.ct << 1) | ((octant >> 2) & 1),
            self.depth + 1,
        )


@dataclass(frozen=True, slots=True)
class MortonKey:
    value: int
    depth: int

    def __post_init__(self):
        if not 0 <= self.depth <= MAX_ORDER:
            raise DomainError(f"depth must be in [0, {MAX_ORDER}], got {self.depth}")
        if not 0 <= self.value < (1 << (3 * self.depth)):
            raise DomainError(f"Morton key {self.value} out of range for depth {self.depth}")


# Spread the low 21 bits of n two positions apart (and back).
# https://fgiesen.wordpress.com/2009/12/13/decoding-morton-codes/
def _part1by2(n: int) -> int:
    n &= 0x1FFFFF
    n = (n | (n << 32)) & 0x1F00000000FFFF
    n = (n | (n << 16)) & 0x1F0000FF0000FF
    n = (n | (n << 8)) & 0x100F00F00F00F00F
    n = (n | (n << 4)) & 0x10C30C30C30C30C3
    n = (n | (n << 2)) & 0x1249249249249249
    return n


def _compact1by2(n: int) -> int:
    n &= 0x1249249249249249
    n = (n ^ (n >> 2)) & 0x10C30C30C30C30C3
    n = (n ^ (n >> 4)) & 0x100F00F00F00F00F
    n = (n ^ (n >> 8)) & 0x1F0000FF0000FF
    n = (n ^ (n >> 16)) & 0x1F00000000FFFF
    n = (n ^ (n >> 32)) & 0x1FFFFF
    return n


def morton3_encode(c: CellCoord) -> MortonKey:
    return MortonKey((_part1by2(c.ct) << 2) | (_part1by2(c.cy) << 1) | _part1by2(c.cx), c.depth)


def morton3_decode(k: MortonKey) -> CellCoord:
    return CellCoord(
        _compact1by2(k.value),
        _compact1by2(k.value >> 1),
        _compact1by2(k.value >> 2),
        k.depth,
    )


def octant_of(cx: int, cy: int, ct: int, shift: int) -> int:
    """Per-level Morton triplet of full-depth cell coordinates at bit `shift`."""
    return (((ct >> shift) & 1) << 2) | (((cy >> shift) & 1) << 1) | ((cx >> shift) & 1)
