"""
Benchmark harness: times the indexed search (with and without MBRSign
pruning) against the linear scan on the same seeded query boxes.

Result sets are compared across methods before any timing is taken; a
disagreement aborts the run with VerificationError.
"""

import logging
import time
from typing import Callable, Dict, List, Optional, Sequence, Set

import numpy as np
from pydantic import BaseModel, Field

from src.errors import DomainError, VerificationError
from src.index.hoc_tree import HOCTree
from src.index.models import IndexConfig, STObject
from src.search.linear_scan import scan_range
from src.search.range_search import QueryStats, RangeQuery, range_search

logger = logging.getLogger(__name__)

METHODS = ("hoc", "hoc-notag", "scan")


class MethodReport(BaseModel):
    method: str
    mean_ms: float
    median_ms: float
    runs: int
    stats: Optional[QueryStats] = None


class BenchReport(BaseModel):
    dataset: str
    object_count: int
    spatial_extent: float
    temporal_extent: float
    selectivity: float
    queries: int
    repetitions: int = Field(ge=1)
    seed: int
    timing: str
    build_seconds: Optional[float] = None
    index_bytes: Optional[int] = None
    index_bytes_without_tags: Optional[int] = None
    methods: List[MethodReport]


def random_queries(
    cfg: IndexConfig, spatial_extent: float, temporal_extent: float, count: int, seed: int
) -> List[RangeQuery]:
    """Boxes of fixed extents with uniformly random origins such that each fits in the domain."""
    if spatial_extent < 0 or temporal_extent < 0:
        raise DomainError("query extents must be >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    sx = min(spatial_extent, cfg.x_hi - cfg.x_lo)
    sy = min(spatial_extent, cfg.y_hi - cfg.y_lo)
    st = min(temporal_extent, cfg.t_hi - cfg.t_lo)
    x0 = rng.uniform(cfg.x_lo, cfg.x_hi - sx, count)
    y0 = rng.uniform(cfg.y_lo, cfg.y_hi - sy, count)
    t0 = rng.uniform(cfg.t_lo, cfg.t_hi - st, count)
    return [
        RangeQuery(x, min(x + sx, cfg.x_hi), y, min(y + sy, cfg.y_hi), t, min(t + st, cfg.t_hi))
        for x, y, t in zip(x0.tolist(), y0.tolist(), t0.tolist())
    ]


def selectivity(cfg: IndexConfig, spatial_extent: float, temporal_extent: float) -> float:
    """Fraction of the domain volume covered by one query box."""
    fx = min(spatial_extent / (cfg.x_hi - cfg.x_lo), 1.0)
    fy = min(spatial_extent / (cfg.y_hi - cfg.y_lo), 1.0)
    ft = min(temporal_extent / (cfg.t_hi - cfg.t_lo), 1.0)
    return fx * fy * ft


def _runner(method: str, tree: HOCTree, objects: Sequence[STObject], parallel: bool, workers: int) -> Callable:
    if method == "hoc":
        return lambda q: range_search(tree, q, use_mbr=True, parallel=parallel, workers=workers)
    if method == "hoc-notag":
        return lambda q: range_search(tree, q, use_mbr=False, parallel=parallel, workers=workers)
    if method == "scan":
        return lambda q: (scan_range(objects, q), None)
    raise DomainError(f"unknown benchmark method {method!r}, expected one of {', '.join(METHODS)}")


def _add_stats(total: QueryStats, part: QueryStats) -> None:
    for name in QueryStats.model_fields:
        setattr(total, name, getattr(total, name) + getattr(part, name))


def run_bench(
    tree: HOCTree,
    objects: Sequence[STObject],
    spatial_extent: float = 600.0,
    temporal_extent: float = 600.0,
    queries: int = 50,
    reps: int = 5,
    methods: Sequence[str] = METHODS,
    seed: int = 42,
    parallel: bool = False,
    workers: int = 4,
    dataset: str = "",
) -> BenchReport:
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    if not methods:
        raise DomainError("at least one benchmark method is required")
    cfg = tree.config
    boxes = random_queries(cfg, spatial_extent, temporal_extent, queries, seed)
    runners: Dict[str, Callable] = {m: _runner(m, tree, objects, parallel, workers) for m in methods}

    # Correctness pass, also collects per-method statistics.
    totals: Dict[str, Optional[QueryStats]] = {}
    reference: Optional[List[Set[str]]] = None
    reference_method = ""
    for method, run in runners.items():
        total = None if method == "scan" else QueryStats()
        answers: List[Set[str]] = []
        for q in boxes:
            result, stats = run(q)
            answers.append({o.id for o in result})
            if total is not None:
                _add_stats(total, stats)
        totals[method] = total
        if reference is None:
            reference, reference_method = answers, method
            continue
        for i, (expected, got) in enumerate(zip(reference, answers)):
            if expected != got:
                raise VerificationError(
                    f"{method} disagrees with {reference_method} on query {i} {boxes[i]}: "
                    f"{len(expected - got)} missing, {len(got - expected)} extra"
                )

    latencies: Dict[str, List[float]] = {m: [] for m in runners}
    order = list(runners.items())
    for rep in range(reps):
        for i, q in enumerate(boxes):
            # every method runs on the same box back to back; the leading one rotates
            k = (rep * len(boxes) + i) % len(order)
            for method, run in order[k:] + order[:k]:
                start = time.perf_counter()
                run(q)
                latencies[method].append((time.perf_counter() - start) * 1000.0)

    reports = []
    for method in runners:
        lat = np.asarray(latencies[method])
        reports.append(
            MethodReport(
                method=method,
                mean_ms=float(lat.mean()) if len(lat) else 0.0,
                median_ms=float(np.median(lat)) if len(lat) else 0.0,
                runs=reps,
                stats=totals[method],
            )
        )
        logger.info("%s: mean %.3f ms over %d queries x %d reps", method, reports[-1].mean_ms, len(boxes), reps)

    timing = "wall clock per query, methods interleaved per box, sequential"
    if parallel:
        timing = (
            f"wall clock per query, methods interleaved per box, regions split into {workers} batches on a thread pool"
        )
    return BenchReport(
        dataset=dataset,
        object_count=tree.object_count,
        spatial_extent=spatial_extent,
        temporal_extent=temporal_extent,
        selectivity=selectivity(cfg, spatial_extent, temporal_extent),
        queries=len(boxes),
        repetitions=reps,
        seed=seed,
        timing=timing,
        methods=reports,
    )
