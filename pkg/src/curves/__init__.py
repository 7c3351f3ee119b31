from src.curves.hilbert import (
    MAX_ORDER,
    CellRect,
    HilbertIndex,
    HilbertRange,
    block_span,
    coalesce_regions,
    get_hilbert_values,
    hilbert_decode,
    hilbert_decode_array,
    hilbert_encode,
    hilbert_encode_array,
    hilbert_ranges,
)
from src.curves.morton import CellCoord, MortonKey, morton3_decode, morton3_encode, octant_of

__all__ = [
    "MAX_ORDER",
    "CellCoord",
    "CellRect",
    "HilbertIndex",
    "HilbertRange",
    "MortonKey",
    "block_span",
    "coalesce_regions",
    "get_hilbert_values",
    "hilbert_decode",
    "hilbert_decode_array",
    "hilbert_encode",
    "hilbert_encode_array",
    "hilbert_ranges",
    "morton3_decode",
    "morton3_encode",
    "octant_of",
]
