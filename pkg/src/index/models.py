import struct
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from src.curves.hilbert import MAX_ORDER
from src.curves.morton import CellCoord, MortonKey
from src.errors import DomainError


@dataclass(frozen=True, slots=True)
class STObject:
    """One spatio-temporal record: id plus (x, y, t) in scaled domain units."""

    id: str
    x: float
    y: float
    t: float


class IndexConfig(BaseModel):
    """Domain bounds, deepest level L and leaf split threshold psi."""

    model_config = ConfigDict(frozen=True)

    x_lo: float = 0.0
    x_hi: float = 10000.0
    y_lo: float = 0.0
    y_hi: float = 10000.0
    t_lo: float = 0.0
    t_hi: float = 5000.0
    L: int = 16
    psi: int = 200

    @model_validator(mode="after")
    def _check_bounds(self) -> "IndexConfig":
        # DomainError is not a ValueError, so pydantic lets it through unwrapped.
        for axis in ("x", "y", "t"):
            lo, hi = getattr(self, f"{axis}_lo"), getattr(self, f"{axis}_hi")
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo >= hi:
                raise DomainError(f"{axis} bounds must satisfy lo < hi, got [{lo}, {hi}]")
        if not 1 <= self.L <= MAX_ORDER:
            raise DomainError(f"L must be in [1, {MAX_ORDER}], got {self.L}")
        if self.psi < 1:
            raise DomainError(f"psi must be >= 1, got {self.psi}")
        return self

    @classmethod
    def create(cls, **kwargs) -> "IndexConfig":
        try:
            return cls(**kwargs)
        except ValidationError as e:
            raise DomainError(f"invalid index configuration: {e}") from e

    def contains(self, x: float, y: float, t: float) -> bool:
        return (
            self.x_lo <= x <= self.x_hi
            and self.y_lo <= y <= self.y_hi
            and self.t_lo <= t <= self.t_hi
        )


def _f32_down(v: float) -> float:
    f = np.float32(v)
    if float(f) > v:
        f = np.nextafter(f, np.float32(-np.inf))
    return float(f)


def _f32_up(v: float) -> float:
    f = np.float32(v)
    if float(f) < v:
        f = np.nextafter(f, np.float32(np.inf))
    return float(f)


@dataclass(frozen=True, slots=True)
class MBRSign:
    """Spatial MBR of a leaf stored as four float32 values (16 bytes).

    Minima are rounded toward -inf and maxima toward +inf, so the stored
    rectangle always contains the exact double-precision MBR.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    SIZE = 16
    _STRUCT = struct.Struct("<4f")

    @classmethod
    def from_bounds(cls, x_min: float, y_min: float, x_max: float, y_max: float) -> "MBRSign":
        return cls(_f32_down(x_min), _f32_down(y_min), _f32_up(x_max), _f32_up(y_max))

    def extend(self, x: float, y: float) -> "MBRSign":
        return MBRSign(
            min(self.x_min, _f32_down(x)),
            min(self.y_min, _f32_down(y)),
            max(self.x_max, _f32_up(x)),
            max(self.y_max, _f32_up(y)),
        )

    def contains_point(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def to_bytes(self) -> bytes:
        return self._STRUCT.pack(self.x_min, self.y_min, self.x_max, self.y_max)

    @classmethod
    def from_bytes(cls, data: bytes) -> "MBRSign":
        return cls(*cls._STRUCT.unpack(data))


Box = Tuple[float, float, float, float, float, float]


@dataclass(slots=True, eq=False)
class Node:
    """Octree node. Leaves hold entries; internal nodes hold 8 octant slots.

    `box` is the closed geometric cube (x0, x1, y0, y1, t0, t1) and
    `hilbert_lo`/`hilbert_hi` the Hilbert run at order L of the node's
    spatial footprint.
    """

    depth: int
    cell: CellCoord
    box: Box
    hilbert_lo: int
    hilbert_hi: int
    children: Optional[List[Optional["Node"]]] = None
    entries: Optional[List[STObject]] = field(default_factory=list)
    mbrsign: Optional[MBRSign] = None
    label: Optional[MortonKey] = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def kind(self) -> str:
        return "leaf" if self.children is None else "internal"

    def __repr__(self) -> str:
        size = len(self.entries) if self.entries is not None else 0
        return f"Node({self.kind}, depth={self.depth}, cell={self.cell}, entries={size})"
