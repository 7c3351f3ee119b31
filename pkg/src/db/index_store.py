"""
Binary index file store for HOC-Trees.

Layout (little-endian), documented field by field in docs/index_format.md:

    header   magic "HOCTREE\\0", version, flags, domain bounds, L, psi,
             object_count, payload length, sha256 of the fields before it
             followed by the payload
    payload  nodes in depth-first pre-order, children in octant order

Internal node: u8 kind=1, u8 child presence mask.
Leaf:          u8 kind=0, u32 entry count, 16-byte MBRSign when tags are
               stored and the leaf is non-empty, then per entry
               u16 id length, utf-8 id, x, y, t as f64.
"""

import hashlib
import logging
import struct
from pathlib import Path
from typing import List, Tuple, Union

from src.curves.morton import CellCoord
from src.errors import (
    BadMagicError,
    ChecksumError,
    DomainError,
    IndexFileError,
    InvariantViolationError,
    TruncatedFileError,
    VersionMismatchError,
)
from src.index.hoc_tree import HOCTree, compute_mbrsign, validate
from src.index.models import IndexConfig, MBRSign, Node, STObject

logger = logging.getLogger(__name__)

MAGIC = b"HOCTREE\x00"
VERSION = 1
FLAG_TAGS = 0x1

# checksummed header fields, followed by the 32-byte sha256
_FIELDS = struct.Struct("<8sHH6dBIQQ")
HEADER = struct.Struct("<8sHH6dBIQQ32s")
_KIND = struct.Struct("<B")
_MASK = struct.Struct("<B")
_COUNT = struct.Struct("<I")
_ID_LEN = struct.Struct("<H")
_COORDS = struct.Struct("<3d")

LEAF, INTERNAL = 0, 1


def _encode_node(node: Node, include_tags: bool, out: List[bytes]) -> None:
    if node.children is not None:
        mask = 0
        for octant, child in enumerate(node.children):
            if child is not None:
                mask |= 1 << octant
        out.append(_KIND.pack(INTERNAL))
        out.append(_MASK.pack(mask))
        for child in node.children:
            if child is not None:
                _encode_node(child, include_tags, out)
        return
    out.append(_KIND.pack(LEAF))
    out.append(_COUNT.pack(len(node.entries)))
    if include_tags and node.entries:
        out.append(node.mbrsign.to_bytes())
    for e in node.entries:
        raw_id = e.id.encode("utf-8")
        if len(raw_id) > 0xFFFF:
            raise IndexFileError(f"object id {e.id[:32]!r}... exceeds 65535 bytes")
        out.append(_ID_LEN.pack(len(raw_id)))
        out.append(raw_id)
        out.append(_COORDS.pack(e.x, e.y, e.t))


def dumps(tree: HOCTree, include_tags: bool = True) -> bytes:
    """The complete index file contents for `tree`."""
    validate(tree, deep=False)
    parts: List[bytes] = []
    _encode_node(tree.root, include_tags, parts)
    payload = b"".join(parts)
    cfg = tree.config
    fields = _FIELDS.pack(
        MAGIC,
        VERSION,
        FLAG_TAGS if include_tags else 0,
        cfg.x_lo, cfg.x_hi, cfg.y_lo, cfg.y_hi, cfg.t_lo, cfg.t_hi,
        cfg.L,
        cfg.psi,
        tree.object_count,
        len(payload),
    )
    return fields + _digest(fields, payload) + payload


def _digest(fields: bytes, payload: bytes) -> bytes:
    h = hashlib.sha256(fields)
    h.update(payload)
    return h.digest()


class _Reader:
    def __init__(self, payload: bytes):
        self.buf = memoryview(payload)
        self.pos = 0

    def unpack(self, fmt: struct.Struct) -> Tuple:
        if self.pos + fmt.size > len(self.buf):
            raise IndexFileError(f"payload ends inside a record at offset {self.pos}")
        values = fmt.unpack_from(self.buf, self.pos)
        self.pos += fmt.size
        return values

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise IndexFileError(f"payload ends inside a record at offset {self.pos}")
        data = bytes(self.buf[self.pos:self.pos + n])
        self.pos += n
        return data


def _decode_node(reader: _Reader, tree: HOCTree, cell: CellCoord, tagged: bool) -> Node:
    (kind,) = reader.unpack(_KIND)
    if kind == INTERNAL:
        if cell.depth >= tree.config.L:
            raise IndexFileError(f"internal node at depth {cell.depth} below the deepest level")
        (mask,) = reader.unpack(_MASK)
        node = tree.new_leaf(cell)
        tree.make_internal(node)
        for octant in range(8):
            if mask & (1 << octant):
                node.children[octant] = _decode_node(reader, tree, cell.child(octant), tagged)
        return node
    if kind != LEAF:
        raise IndexFileError(f"unknown node kind {kind} at offset {reader.pos - 1}")

    (count,) = reader.unpack(_COUNT)
    tag = MBRSign.from_bytes(reader.take(MBRSign.SIZE)) if tagged and count else None
    entries = []
    for _ in range(count):
        (id_len,) = reader.unpack(_ID_LEN)
        try:
            object_id = reader.take(id_len).decode("utf-8")
        except UnicodeDecodeError as e:
            raise IndexFileError(f"object id is not valid utf-8: {e}") from e
        x, y, t = reader.unpack(_COORDS)
        entries.append(STObject(object_id, x, y, t))
    node = tree.new_leaf(cell)
    node.entries = entries
    if entries:
        node.mbrsign = tag if tag is not None else compute_mbrsign(entries)
    return node


def loads(data: bytes) -> HOCTree:
    """Inverse of dumps. Raises a distinct IndexFileError subclass per failure."""
    if len(data) < len(MAGIC):
        raise TruncatedFileError(f"file holds {len(data)} bytes, shorter than the magic tag")
    if data[:len(MAGIC)] != MAGIC:
        raise BadMagicError(f"not a HOC-Tree index file (magic {data[:len(MAGIC)]!r})")
    if len(data) < HEADER.size:
        raise TruncatedFileError(f"file holds {len(data)} bytes, header needs {HEADER.size}")

    (_, version, flags, x_lo, x_hi, y_lo, y_hi, t_lo, t_hi,
     L, psi, object_count, payload_len, digest) = HEADER.unpack_from(data, 0)
    if version != VERSION:
        raise VersionMismatchError(f"index file version {version}, this build reads version {VERSION}")
    payload = data[HEADER.size:]
    if len(payload) < payload_len:
        raise TruncatedFileError(f"payload holds {len(payload)} of {payload_len} bytes")
    if len(payload) > payload_len:
        raise IndexFileError(f"{len(payload) - payload_len} trailing bytes after the payload")
    if _digest(data[:_FIELDS.size], payload) != digest:
        raise ChecksumError("checksum over header fields and payload does not match")

    try:
        cfg = IndexConfig.create(x_lo=x_lo, x_hi=x_hi, y_lo=y_lo, y_hi=y_hi, t_lo=t_lo, t_hi=t_hi, L=L, psi=psi)
    except DomainError as e:
        raise IndexFileError(f"header holds an invalid configuration: {e}") from e

    tree = HOCTree(cfg)
    reader = _Reader(payload)
    try:
        root = _decode_node(reader, tree, CellCoord(0, 0, 0, 0), bool(flags & FLAG_TAGS))
        if reader.pos != len(payload):
            raise IndexFileError(f"{len(payload) - reader.pos} unread payload bytes after the root")
        tree.attach_root(root)
    except DomainError as e:
        raise IndexFileError(f"payload is inconsistent: {e}") from e
    if tree.object_count != object_count:
        raise IndexFileError(f"header object_count {object_count} != {tree.object_count} stored entries")
    try:
        validate(tree, deep=True)
    except InvariantViolationError as e:
        raise IndexFileError(f"stored tree breaks its invariants: {e}") from e
    return tree


def save(tree: HOCTree, path: Union[str, Path], include_tags: bool = True) -> int:
    """Write the index file; returns the number of bytes written."""
    data = dumps(tree, include_tags=include_tags)
    try:
        Path(path).write_bytes(data)
    except OSError as e:
        raise IndexFileError(f"cannot write index file {path}: {e.strerror}") from e
    logger.info("saved %d objects to %s (%d bytes, tags=%s)", tree.object_count, path, len(data), include_tags)
    return len(data)


def load(path: Union[str, Path]) -> HOCTree:
    try:
        data = Path(path).read_bytes()
    except OSError as e:
        raise IndexFileError(f"cannot read index file {path}: {e.strerror}") from e
    tree = loads(data)
    logger.info("loaded %d objects from %s", tree.object_count, path)
    return tree
