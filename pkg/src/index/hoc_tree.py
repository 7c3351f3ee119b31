"""
HOC-Tree: an octree over (x, y, t) with Morton-labelled leaves and MBRSign tags.

Cubes split at their geometric midpoints into octants. Empty octants are not
materialised. A leaf holds at most psi entries unless it sits at depth L.
"""

import logging
import time
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from src.curves.hilbert import HilbertRange, block_span
from src.curves.morton import CellCoord, morton3_decode, morton3_encode, octant_of
from src.errors import DomainError, DuplicateIdError, InvariantViolationError
from src.index.models import Box, IndexConfig, MBRSign, Node, STObject

logger = logging.getLogger(__name__)


def _edge(lo: float, hi: float, c: int, depth: int) -> float:
    n = 1 << depth
    if c >= n:
        return hi
    return lo + (hi - lo) * (c / n)


def _axis_cell(v: float, lo: float, hi: float, depth: int) -> int:
    n = 1 << depth
    c = int((v - lo) / (hi - lo) * n)
    if c >= n:
        c = n - 1
    elif c < 0:
        c = 0
    # One-ulp correction so membership always agrees with the cube edges.
    if c > 0 and v < _edge(lo, hi, c, depth):
        c -= 1
    elif c + 1 < n and v >= _edge(lo, hi, c + 1, depth):
        c += 1
    return c


def _axis_cells(v: np.ndarray, lo: float, hi: float, depth: int) -> np.ndarray:
    """Vectorised _axis_cell."""
    n = 1 << depth
    c = np.floor((v - lo) / (hi - lo) * n).astype(np.int64)
    c = np.clip(c, 0, n - 1)
    lower = lo + (hi - lo) * (c / n)
    c = np.where((c > 0) & (v < lower), c - 1, c)
    upper = lo + (hi - lo) * ((c + 1) / n)
    c = np.where((c + 1 < n) & (v >= upper), c + 1, c)
    return c


def axis_span(v_lo: float, v_hi: float, lo: float, hi: float, depth: int) -> Tuple[int, int]:
    """Cells whose closed extent meets [v_lo, v_hi] (both already inside [lo, hi])."""
    c_lo = _axis_cell(v_lo, lo, hi, depth)
    if c_lo > 0 and _edge(lo, hi, c_lo, depth) == v_lo:
        c_lo -= 1
    return c_lo, _axis_cell(v_hi, lo, hi, depth)


def quantize(p: STObject, cfg: IndexConfig, depth: int) -> CellCoord:
    """Cell of `p` at `depth`: floor of the normalised coordinate times 2^depth,
    clamped to the last cell."""
    if not cfg.contains(p.x, p.y, p.t):
        raise DomainError(f"object {p.id!r} at ({p.x}, {p.y}, {p.t}) lies outside the index domain")
    if not 0 <= depth <= cfg.L:
        raise DomainError(f"depth must be in [0, {cfg.L}], got {depth}")
    return CellCoord(
        _axis_cell(p.x, cfg.x_lo, cfg.x_hi, depth),
        _axis_cell(p.y, cfg.y_lo, cfg.y_hi, depth),
        _axis_cell(p.t, cfg.t_lo, cfg.t_hi, depth),
        depth,
    )


def cube_box(cell: CellCoord, cfg: IndexConfig) -> Box:
    d = cell.depth
    return (
        _edge(cfg.x_lo, cfg.x_hi, cell.cx, d),
        _edge(cfg.x_lo, cfg.x_hi, cell.cx + 1, d),
        _edge(cfg.y_lo, cfg.y_hi, cell.cy, d),
        _edge(cfg.y_lo, cfg.y_hi, cell.cy + 1, d),
        _edge(cfg.t_lo, cfg.t_hi, cell.ct, d),
        _edge(cfg.t_lo, cfg.t_hi, cell.ct + 1, d),
    )


def compute_mbrsign(entries: Sequence[STObject]) -> MBRSign:
    """Conservative float32 MBR of the entries' (x, y) locations."""
    if not entries:
        raise DomainError("cannot compute an MBRSign for an empty leaf")
    xs = np.fromiter((e.x for e in entries), dtype=np.float64, count=len(entries))
    ys = np.fromiter((e.y for e in entries), dtype=np.float64, count=len(entries))
    return MBRSign.from_bounds(float(xs.min()), float(ys.min()), float(xs.max()), float(ys.max()))


class TreeSummary(BaseModel):
    object_count: int
    node_count: int
    internal_count: int
    leaf_count: int
    non_empty_leaf_count: int
    max_depth: int
    depth_histogram: Dict[int, int]
    occupancy_mean: float
    occupancy_variance: float
    tag_bytes: int


class HOCTree:
    """The index. Build or insert with exclusive access; a built tree is read-only."""

    def __init__(self, config: IndexConfig):
        self.config = config
        # deepest node depth ever created; nodes are never removed
        self.height = 0
        self.root = self.new_leaf(CellCoord(0, 0, 0, 0))
        self.object_count = 0
        self._ids: set = set()

    # -- node construction -------------------------------------------------

    def new_leaf(self, cell: CellCoord, entries: Optional[List[STObject]] = None) -> Node:
        lo, hi = block_span(cell.cx, cell.cy, cell.depth, self.config.L)
        node = Node(
            depth=cell.depth,
            cell=cell,
            box=cube_box(cell, self.config),
            hilbert_lo=lo,
            hilbert_hi=hi,
            entries=entries if entries is not None else [],
            label=morton3_encode(cell),
        )
        self.height = max(self.height, cell.depth)
        if node.entries:
            node.mbrsign = compute_mbrsign(node.entries)
        return node

    def make_internal(self, node: Node) -> None:
        node.children = [None] * 8
        node.entries = None
        node.mbrsign = None
        node.label = None

    def attach_root(self, root: Node) -> None:
        """Install a ready-made node hierarchy and recount its objects."""
        ids: set = set()
        count = 0
        height = 0
        stack = [root]
        while stack:
            node = stack.pop()
            height = max(height, node.depth)
            if node.children is not None:
                stack.extend(c for c in node.children if c is not None)
                continue
            for e in node.entries:
                if e.id in ids:
                    raise DuplicateIdError(e.id)
                ids.add(e.id)
            count += len(node.entries)
        self.root = root
        self.height = height
        self._ids = ids
        self.object_count = count

    # -- insertion -----------------------------------------------------------

    def _check_object(self, o: STObject) -> None:
        if not self.config.contains(o.x, o.y, o.t):
            raise DomainError(f"object {o.id!r} at ({o.x}, {o.y}, {o.t}) lies outside the index domain")
        if o.id in self._ids:
            raise DuplicateIdError(o.id)

    def _full_cell(self, o: STObject) -> Tuple[int, int, int]:
        cfg = self.config
        return (
            _axis_cell(o.x, cfg.x_lo, cfg.x_hi, cfg.L),
            _axis_cell(o.y, cfg.y_lo, cfg.y_hi, cfg.L),
            _axis_cell(o.t, cfg.t_lo, cfg.t_hi, cfg.L),
        )

    def insert(self, o: STObject) -> "HOCTree":
        self._check_object(o)
        L = self.config.L
        cx, cy, ct = self._full_cell(o)
        node = self.root
        while not node.is_leaf:
            octant = octant_of(cx, cy, ct, L - node.depth - 1)
            child = node.children[octant]
            if child is None:
                child = self.new_leaf(node.cell.child(octant))
                node.children[octant] = child
            node = child
        node.entries.append(o)
        node.mbrsign = MBRSign.from_bounds(o.x, o.y, o.x, o.y) if node.mbrsign is None else node.mbrsign.extend(o.x, o.y)
        self._ids.add(o.id)
        self.object_count += 1
        if len(node.entries) > self.config.psi and node.depth < L:
            self._split(node)
        return self

    def _split(self, node: Node) -> None:
        L = self.config.L
        shift = L - node.depth - 1
        buckets: List[List[STObject]] = [[] for _ in range(8)]
        for e in node.entries:
            cx, cy, ct = self._full_cell(e)
            buckets[octant_of(cx, cy, ct, shift)].append(e)
        self.make_internal(node)
        for octant, bucket in enumerate(buckets):
            if not bucket:
                continue
            child = self.new_leaf(node.cell.child(octant), bucket)
            node.children[octant] = child
            if len(bucket) > self.config.psi and child.depth < L:
                self._split(child)
        logger.debug("split node at depth %d cell %s", node.depth, node.cell)

    # -- bulk loading ----------------------------------------------------------

    def _bulk(
        self,
        objects: Sequence[STObject],
        cells: Tuple[np.ndarray, np.ndarray, np.ndarray],
        idx: np.ndarray,
        cell: CellCoord,
    ) -> Node:
        L, psi = self.config.L, self.config.psi
        if len(idx) <= psi or cell.depth == L:
            return self.new_leaf(cell, [objects[i] for i in idx.tolist()])
        shift = L - cell.depth - 1
        cx, cy, ct = cells
        octants = (((ct[idx] >> shift) & 1) << 2) | (((cy[idx] >> shift) & 1) << 1) | ((cx[idx] >> shift) & 1)
        node = self.new_leaf(cell)
        self.make_internal(node)
        for octant in range(8):
            sub = idx[octants == octant]
            if len(sub):
                node.children[octant] = self._bulk(objects, cells, sub, cell.child(octant))
        return node

    # -- traversal ---------------------------------------------------------------

    def iter_nodes(self) -> Iterator[Node]:
        """Pre-order, children in octant (Morton) order."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if node.children is not None:
                stack.extend(c for c in reversed(node.children) if c is not None)

    def iter_leaves(self, include_empty: bool = False) -> Iterator[Node]:
        """Leaves in ascending Morton label order."""
        for node in self.iter_nodes():
            if node.is_leaf and (include_empty or node.entries):
                yield node

    def objects(self) -> List[STObject]:
        return [e for leaf in self.iter_leaves() for e in leaf.entries]

    def summary(self) -> TreeSummary:
        histogram: Dict[int, int] = {}
        occupancy: List[int] = []
        internal = 0
        for node in self.iter_nodes():
            if node.is_leaf:
                histogram[node.depth] = histogram.get(node.depth, 0) + 1
                occupancy.append(len(node.entries))
            else:
                internal += 1
        occ = np.asarray(occupancy, dtype=np.float64)
        non_empty = int(np.count_nonzero(occ))
        return TreeSummary(
            object_count=self.object_count,
            node_count=internal + len(occupancy),
            internal_count=internal,
            leaf_count=len(occupancy),
            non_empty_leaf_count=non_empty,
            max_depth=max(histogram) if histogram else 0,
            depth_histogram=dict(sorted(histogram.items())),
            occupancy_mean=float(occ.mean()) if len(occ) else 0.0,
            occupancy_variance=float(occ.var()) if len(occ) else 0.0,
            tag_bytes=non_empty * MBRSign.SIZE,
        )

    def cube_occupancy(self, depth: int) -> np.ndarray:
        """Object count of every cube at `depth`, empty ones included, indexed (ct, cy, cx)."""
        if not 0 <= depth <= min(self.config.L, 8):
            raise DomainError(f"occupancy depth must be in [0, {min(self.config.L, 8)}], got {depth}")
        cfg = self.config
        objects = self.objects()
        side = 1 << depth
        if not objects:
            return np.zeros(side ** 3, dtype=np.int64)
        n = len(objects)
        cx = _axis_cells(np.fromiter((o.x for o in objects), dtype=np.float64, count=n), cfg.x_lo, cfg.x_hi, depth)
        cy = _axis_cells(np.fromiter((o.y for o in objects), dtype=np.float64, count=n), cfg.y_lo, cfg.y_hi, depth)
        ct = _axis_cells(np.fromiter((o.t for o in objects), dtype=np.float64, count=n), cfg.t_lo, cfg.t_hi, depth)
        return np.bincount((ct * side + cy) * side + cx, minlength=side ** 3)

    def __len__(self) -> int:
        return self.object_count


def build(objects: Iterable[STObject], cfg: IndexConfig) -> HOCTree:
    """Bulk-load a tree; the result equals inserting the objects one by one."""
    start = time.perf_counter()
    objects = list(objects)
    tree = HOCTree(cfg)
    if not objects:
        return tree
    n = len(objects)
    xs = np.fromiter((o.x for o in objects), dtype=np.float64, count=n)
    ys = np.fromiter((o.y for o in objects), dtype=np.float64, count=n)
    ts = np.fromiter((o.t for o in objects), dtype=np.float64, count=n)
    outside = ~(
        (xs >= cfg.x_lo) & (xs <= cfg.x_hi)
        & (ys >= cfg.y_lo) & (ys <= cfg.y_hi)
        & (ts >= cfg.t_lo) & (ts <= cfg.t_hi)
    )
    if outside.any():
        bad = objects[int(np.argmax(outside))]
        raise DomainError(f"object {bad.id!r} at ({bad.x}, {bad.y}, {bad.t}) lies outside the index domain")
    for o in objects:
        if o.id in tree._ids:
            raise DuplicateIdError(o.id)
        tree._ids.add(o.id)

    cells = (
        _axis_cells(xs, cfg.x_lo, cfg.x_hi, cfg.L),
        _axis_cells(ys, cfg.y_lo, cfg.y_hi, cfg.L),
        _axis_cells(ts, cfg.t_lo, cfg.t_hi, cfg.L),
    )
    tree.root = tree._bulk(objects, cells, np.arange(n), CellCoord(0, 0, 0, 0))
    tree.object_count = n
    logger.info("built HOC-Tree over %d objects in %.3fs", n, time.perf_counter() - start)
    return tree


def insert(tree: HOCTree, o: STObject) -> HOCTree:
    return tree.insert(o)


def leaf_cells_in_hilbert_range(tree: HOCTree, r: HilbertRange) -> Iterator[Node]:
    """Non-empty leaves whose level-L spatial footprint meets the cells indexed by r."""
    stack = [tree.root]
    while stack:
        node = stack.pop()
        if node.hilbert_hi < r.lo or node.hilbert_lo > r.hi:
            continue
        if node.is_leaf:
            if node.entries:
                yield node
        else:
            stack.extend(c for c in reversed(node.children) if c is not None)


def find_violations(tree: HOCTree, deep: bool = True) -> List[str]:
    """Structural invariant check. deep=True also re-quantises every entry."""
    cfg = tree.config
    problems: List[str] = []
    total = 0
    for node in tree.iter_nodes():
        if not node.is_leaf:
            if node.entries is not None or node.mbrsign is not None:
                problems.append(f"internal node {node.cell} carries leaf data")
            for octant, child in enumerate(node.children):
                if child is not None and child.cell != node.cell.child(octant):
                    problems.append(f"child {child.cell} misplaced under {node.cell}")
            continue
        entries = node.entries
        total += len(entries)
        if node.depth < cfg.L and len(entries) > cfg.psi:
            problems.append(f"leaf {node.cell} holds {len(entries)} > psi entries above depth L")
        if node.label is None or morton3_decode(node.label) != node.cell:
            problems.append(f"leaf {node.cell} label does not round-trip")
        if entries and node.mbrsign is None:
            problems.append(f"non-empty leaf {node.cell} has no MBRSign")
        if deep:
            for e in entries:
                if node.mbrsign is not None and not node.mbrsign.contains_point(e.x, e.y):
                    problems.append(f"entry {e.id!r} outside MBRSign of leaf {node.cell}")
                if quantize(e, cfg, node.depth) != node.cell:
                    problems.append(f"entry {e.id!r} does not belong to leaf {node.cell}")
    if total != tree.object_count:
        problems.append(f"object_count {tree.object_count} != {total} entries in leaves")
    return problems


def validate(tree: HOCTree, deep: bool = False) -> None:
    problems = find_violations(tree, deep=deep)
    if problems:
        raise InvariantViolationError(f"{len(problems)} invariant violation(s), first: {problems[0]}")
