"""
Spatio-temporal range search over a HOC-Tree.

Stages of a query:
1. clip the query box to the index domain
2. map its spatial rectangle to level-L cells and decompose them into
   maximal Hilbert runs (regions) at the resolution of the deepest node
3. per batch of regions, collect the non-empty leaves whose cube meets the
   query box and whose spatial footprint meets a region
4. split those leaves into fully covered and partially covered ones
5. drop partial leaves whose MBRSign misses the query rectangle
6. take full leaves wholesale and refine entries of the surviving partial leaves
"""

import logging
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel

from src.curves.hilbert import CellRect, HilbertRange, hilbert_ranges
from src.errors import DomainError, VerificationError
from src.index.hoc_tree import HOCTree, axis_span
from src.index.models import IndexConfig, MBRSign, Node, STObject
from src.search.linear_scan import scan_range

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class RangeQuery:
    """Closed box [x_min, x_max] x [y_min, y_max] x [t_start, t_end]."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    t_start: float
    t_end: float

    def __post_init__(self):
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max and self.t_start <= self.t_end):
            raise DomainError(f"malformed range query {self}: every lower bound must not exceed its upper bound")

    def contains(self, o: STObject) -> bool:
        return (
            self.x_min <= o.x <= self.x_max
            and self.y_min <= o.y <= self.y_max
            and self.t_start <= o.t <= self.t_end
        )

    @classmethod
    def full_domain(cls, cfg: IndexConfig) -> "RangeQuery":
        return cls(cfg.x_lo, cfg.x_hi, cfg.y_lo, cfg.y_hi, cfg.t_lo, cfg.t_hi)


@dataclass(slots=True)
class CoveringNodes:
    full: List[Node] = field(default_factory=list)
    partial: List[Node] = field(default_factory=list)


class QueryStats(BaseModel):
    nodes_visited: int = 0
    leaves_full: int = 0
    leaves_partial: int = 0
    leaves_pruned_by_mbr: int = 0
    candidates_refined: int = 0
    full_entries: int = 0
    results: int = 0
    regions: int = 0


def clip_query(q: RangeQuery, cfg: IndexConfig) -> Optional[RangeQuery]:
    """q intersected with the domain, or None when they do not meet."""
    x_min, x_max = max(q.x_min, cfg.x_lo), min(q.x_max, cfg.x_hi)
    y_min, y_max = max(q.y_min, cfg.y_lo), min(q.y_max, cfg.y_hi)
    t_start, t_end = max(q.t_start, cfg.t_lo), min(q.t_end, cfg.t_hi)
    if x_min > x_max or y_min > y_max or t_start > t_end:
        return None
    return RangeQuery(x_min, x_max, y_min, y_max, t_start, t_end)


def spatial_cell_rect(q: RangeQuery, cfg: IndexConfig) -> CellRect:
    """Level-L cells whose closed extent meets q's spatial rectangle (q must be clipped)."""
    cx_lo, cx_hi = axis_span(q.x_min, q.x_max, cfg.x_lo, cfg.x_hi, cfg.L)
    cy_lo, cy_hi = axis_span(q.y_min, q.y_max, cfg.y_lo, cfg.y_hi, cfg.L)
    return CellRect(cx_lo, cx_hi, cy_lo, cy_hi)


def walk_regions(tree: HOCTree, rect: CellRect, method: str = "boundary") -> List[HilbertRange]:
    """Hilbert runs over `rect` at the tree's deepest level, scaled to order L.

    Every node block is a union of cells at that level, so a node meets these
    runs exactly when it meets the order-L runs of `rect`.
    """
    L = tree.config.L
    order = min(L, max(tree.height, 1))
    shift = L - order
    if shift == 0:
        return hilbert_ranges(rect, L, method=method)
    coarse = CellRect(rect.cx_lo >> shift, rect.cx_hi >> shift, rect.cy_lo >> shift, rect.cy_hi >> shift)
    width = 2 * shift
    return [HilbertRange(r.lo << width, ((r.hi + 1) << width) - 1) for r in hilbert_ranges(coarse, order, method=method)]


def _box_meets(box, q: RangeQuery) -> bool:
    x0, x1, y0, y1, t0, t1 = box
    return (
        x0 <= q.x_max and q.x_min <= x1
        and y0 <= q.y_max and q.y_min <= y1
        and t0 <= q.t_end and q.t_start <= t1
    )


def _overlapping_leaves(tree: HOCTree, regions: Sequence[HilbertRange], q: RangeQuery) -> Tuple[List[Node], int]:
    """Leaves meeting q's box and at least one of the sorted, disjoint regions."""
    if not regions:
        return [], 0
    highs = [r.hi for r in regions]
    leaves: List[Node] = []
    visited = 0
    stack = [tree.root]
    while stack:
        node = stack.pop()
        visited += 1
        if not _box_meets(node.box, q):
            continue
        i = bisect_left(highs, node.hilbert_lo)
        if i == len(regions) or regions[i].lo > node.hilbert_hi:
            continue
        if node.children is None:
            if node.entries:
                leaves.append(node)
        else:
            stack.extend(c for c in reversed(node.children) if c is not None)
    return leaves, visited


def identify(candidates: Iterable[Node], q: RangeQuery) -> CoveringNodes:
    """Full iff the leaf's closed cube lies inside q's closed box on all three axes."""
    coverage = CoveringNodes()
    for leaf in candidates:
        x0, x1, y0, y1, t0, t1 = leaf.box
        if (
            q.x_min <= x0 and x1 <= q.x_max
            and q.y_min <= y0 and y1 <= q.y_max
            and q.t_start <= t0 and t1 <= q.t_end
        ):
            coverage.full.append(leaf)
        else:
            coverage.partial.append(leaf)
    return coverage


def get_overlapping_cubes(
    tree: HOCTree, region: HilbertRange, q: RangeQuery, stats: Optional[QueryStats] = None
) -> CoveringNodes:
    leaves, visited = _overlapping_leaves(tree, [region], q)
    if stats is not None:
        stats.nodes_visited += visited
    return identify(leaves, q)


def mbr_check(tag: MBRSign, q: RangeQuery) -> bool:
    """True iff the tag rectangle meets q's spatial rectangle (closed intervals)."""
    return tag.x_min <= q.x_max and q.x_min <= tag.x_max and tag.y_min <= q.y_max and q.y_min <= tag.y_max


def prune(candidates: Iterable[STObject], q: RangeQuery) -> List[STObject]:
    x_min, x_max, y_min, y_max, t_start, t_end = q.x_min, q.x_max, q.y_min, q.y_max, q.t_start, q.t_end
    return [
        e for e in candidates
        if x_min <= e.x <= x_max and y_min <= e.y <= y_max and t_start <= e.t <= t_end
    ]


def collect(
    tree: HOCTree, coverage: CoveringNodes, q: RangeQuery, stats: Optional[QueryStats] = None
) -> Tuple[Set[STObject], QueryStats]:
    """Entries of full leaves as-is plus the refined entries of partial leaves."""
    if stats is None:
        stats = QueryStats(leaves_full=len(coverage.full), leaves_partial=len(coverage.partial))
    results: Set[STObject] = set()
    for leaf in coverage.full:
        results.update(leaf.entries)
        stats.full_entries += len(leaf.entries)
    candidates = [e for leaf in coverage.partial for e in leaf.entries]
    stats.candidates_refined += len(candidates)
    results.update(prune(candidates, q))
    stats.results = len(results)
    return results, stats


def _batches(regions: List[HilbertRange], count: int) -> List[List[HilbertRange]]:
    if count <= 1 or len(regions) <= 1:
        return [regions]
    size = -(-len(regions) // count)
    return [regions[i:i + size] for i in range(0, len(regions), size)]


def range_search(
    tree: HOCTree,
    q: RangeQuery,
    use_mbr: bool = True,
    parallel: bool = False,
    workers: int = 4,
    method: str = "boundary",
) -> Tuple[Set[STObject], QueryStats]:
    """Every indexed object inside q's closed box, plus instrumentation.

    Args:
        use_mbr: skip partial leaves whose MBRSign misses the query rectangle
        parallel: process region batches on a thread pool
        workers: number of region batches (and threads) in parallel mode
        method: Hilbert decomposition method, see hilbert_ranges
    """
    stats = QueryStats()
    clipped = clip_query(q, tree.config)
    if clipped is None or tree.object_count == 0:
        return set(), stats

    regions = walk_regions(tree, spatial_cell_rect(clipped, tree.config), method=method)
    stats.regions = len(regions)

    batches = _batches(regions, workers if parallel else 1)
    if parallel and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=len(batches)) as pool:
            parts = list(pool.map(lambda batch: _overlapping_leaves(tree, batch, clipped), batches))
    else:
        parts = [_overlapping_leaves(tree, batch, clipped) for batch in batches]

    # Merge barrier: a leaf reached from several batches is counted once.
    unique = {}
    for leaves, visited in parts:
        stats.nodes_visited += visited
        for leaf in leaves:
            unique.setdefault(id(leaf), leaf)
    coverage = identify(unique.values(), clipped)

    if use_mbr:
        surviving = []
        for leaf in coverage.partial:
            if mbr_check(leaf.mbrsign, clipped):
                surviving.append(leaf)
            else:
                stats.leaves_pruned_by_mbr += 1
        coverage.partial = surviving

    stats.leaves_full = len(coverage.full)
    stats.leaves_partial = len(coverage.partial)
    results, stats = collect(tree, coverage, clipped, stats)
    logger.debug("range search %s: %s", q, stats)
    return results, stats


def verify_against_oracle(
    tree: HOCTree, objects: Sequence[STObject], q: RangeQuery, **kwargs
) -> Tuple[Set[STObject], QueryStats]:
    """range_search, checked against a linear scan of `objects`."""
    results, stats = range_search(tree, q, **kwargs)
    expected = scan_range(objects, q)
    if {o.id for o in results} != {o.id for o in expected}:
        missing = len({o.id for o in expected} - {o.id for o in results})
        extra = len({o.id for o in results} - {o.id for o in expected})
        raise VerificationError(f"index disagrees with linear scan for {q}: {missing} missing, {extra} extra")
    return results, stats
