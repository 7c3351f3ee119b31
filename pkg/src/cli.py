"""
HOC-Tree command line.

Usage:
    python main.py gen   --n 10000 --kind uniform --seed 42 --out data/un.csv
    python main.py build --csv data/un.csv --out data/un.hoc
    python main.py query --index data/un.hoc --x-min 0 --x-max 600 --y-min 0 --y-max 600 --t-start 0 --t-end 600
    python main.py bench --index data/un.hoc --csv data/un.csv --reps 5
    python main.py sweep --index data/un.hoc --csv data/un.csv --axis spatial
    python main.py info  --index data/un.hoc

Machine output (ids, JSON lines) goes to stdout; summaries and logs go to stderr.
Exit codes: 0 success, 1 usage error, 2 data error, 3 verification mismatch.
"""

import argparse
import json
import logging
import sys
import time
from typing import List, Optional, Sequence

from src import config
from src.data.ingestion import (
    DEFAULT_CLUSTERS,
    DEFAULT_SIGMA,
    gen_clustered,
    gen_uniform,
    load_csv,
    records_as_objects,
    scale_to_domain,
    write_csv,
)
from src.db.index_store import dumps, load, save
from src.errors import ConfigError, DomainError, HOCTreeError, VerificationError
from src.index.hoc_tree import HOCTree, build
from src.index.models import IndexConfig, STObject
from src.search.benchmark import METHODS, BenchReport, run_bench
from src.search.range_search import RangeQuery, range_search, verify_against_oracle

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(payload) -> None:
    print(payload if isinstance(payload, str) else json.dumps(payload))


def _load_objects(path: str, cfg: IndexConfig, no_scale: bool) -> List[STObject]:
    records = load_csv(path)
    return records_as_objects(records) if no_scale else scale_to_domain(records, cfg)


# -- commands --------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = config.default_index_config(args.settings)
    seed = args.settings.default_seed if args.seed is None else args.seed
    if args.kind == "uniform":
        objects = gen_uniform(args.n, seed, cfg)
    else:
        if args.clusters is None or args.sigma is None:
            _note(f"ℹ️ clustered defaults applied: clusters={args.clusters or DEFAULT_CLUSTERS}, "
                  f"sigma={args.sigma or DEFAULT_SIGMA}")
        clusters = DEFAULT_CLUSTERS if args.clusters is None else args.clusters
        sigma = DEFAULT_SIGMA if args.sigma is None else args.sigma
        objects = gen_clustered(args.n, clusters, sigma, seed, cfg)
    write_csv(objects, args.out)
    _note(f"✅ wrote {len(objects)} {args.kind} objects to {args.out} (seed {seed})")
    return EXIT_OK


def cmd_build(args) -> int:
    cfg = config.default_index_config(args.settings)
    cfg = IndexConfig.create(**{**cfg.model_dump(), "L": args.L, "psi": args.psi})
    objects = _load_objects(args.csv, cfg, args.no_scale)
    start = time.perf_counter()
    tree = build(objects, cfg)
    build_seconds = time.perf_counter() - start
    size = save(tree, args.out, include_tags=not args.no_tags)
    summary = tree.summary()
    _note(f"✅ indexed {tree.object_count} objects into {summary.non_empty_leaf_count} leaves "
          f"in {build_seconds:.3f}s, {size} bytes written to {args.out}")
    _emit({
        "object_count": tree.object_count,
        "leaf_count": summary.leaf_count,
        "non_empty_leaf_count": summary.non_empty_leaf_count,
        "L": cfg.L,
        "psi": cfg.psi,
        "build_seconds": build_seconds,
        "file_bytes": size,
    })
    return EXIT_OK


def _query_from_args(args) -> RangeQuery:
    try:
        return RangeQuery(args.x_min, args.x_max, args.y_min, args.y_max, args.t_start, args.t_end)
    except DomainError as e:
        raise UsageError(str(e)) from e


def cmd_query(args) -> int:
    q = _query_from_args(args)
    tree = load(args.index)
    kwargs = dict(use_mbr=not args.no_mbr, parallel=args.parallel, workers=args.workers)
    if args.verify:
        results, stats = verify_against_oracle(tree, tree.objects(), q, **kwargs)
    else:
        results, stats = range_search(tree, q, **kwargs)
    ids = sorted(o.id for o in results)
    if args.format == "json":
        _emit({"ids": ids, "stats": stats.model_dump()})
    else:
        for object_id in ids:
            _emit(object_id)
        print(stats.model_dump_json(), file=sys.stderr)
    if args.verify:
        _note(f"✅ verified {len(ids)} results against the linear scan")
    return EXIT_OK


def _bench_report(args, tree: HOCTree, objects: Sequence[STObject], spatial: float, temporal: float) -> BenchReport:
    report = run_bench(
        tree,
        objects,
        spatial_extent=spatial,
        temporal_extent=temporal,
        queries=args.queries,
        reps=args.reps,
        methods=args.methods,
        seed=args.settings.default_seed if args.seed is None else args.seed,
        parallel=args.parallel,
        workers=args.workers,
        dataset=args.csv,
    )
    start = time.perf_counter()
    build(objects, tree.config)
    report.build_seconds = time.perf_counter() - start
    report.index_bytes = len(dumps(tree, include_tags=True))
    report.index_bytes_without_tags = len(dumps(tree, include_tags=False))
    return report


def _bench_inputs(args):
    tree = load(args.index)
    objects = _load_objects(args.csv, tree.config, args.no_scale)
    if len(objects) != tree.object_count:
        raise DomainError(f"{args.csv} holds {len(objects)} objects but the index holds {tree.object_count}")
    return tree, objects


def cmd_bench(args) -> int:
    tree, objects = _bench_inputs(args)
    report = _bench_report(args, tree, objects, args.spatial_extent, args.temporal_extent)
    for m in report.methods:
        _note(f"⏱️ {m.method}: mean {m.mean_ms:.3f} ms, median {m.median_ms:.3f} ms")
    _emit(report.model_dump_json())
    return EXIT_OK


def cmd_sweep(args) -> int:
    tree, objects = _bench_inputs(args)
    axes = ["spatial", "temporal"] if args.axis == "both" else [args.axis]
    for axis in axes:
        for extent in args.extents:
            spatial, temporal = (extent, args.fixed) if axis == "spatial" else (args.fixed, extent)
            report = _bench_report(args, tree, objects, spatial, temporal)
            _note(f"📈 {axis} extent {extent}: " + ", ".join(f"{m.method} {m.mean_ms:.3f} ms" for m in report.methods))
            _emit(json.dumps({"axis": axis, "extent": extent, **report.model_dump()}))
    return EXIT_OK


def cmd_info(args) -> int:
    tree = load(args.index)
    summary = tree.summary()
    info = {"path": args.index, "config": tree.config.model_dump(), **summary.model_dump()}
    info["depth_histogram"] = {str(k): v for k, v in summary.depth_histogram.items()}
    _emit(info)
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _non_negative_int(raw: str) -> int:
    value = int(raw)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _methods(raw: str) -> List[str]:
    methods = [m.strip() for m in raw.split(",") if m.strip()]
    unknown = [m for m in methods if m not in METHODS]
    if unknown or not methods:
        raise argparse.ArgumentTypeError(f"methods must be a comma list of {', '.join(METHODS)}")
    return methods


def _extents(raw: str) -> List[float]:
    return [float(v) for v in raw.split(",") if v.strip()]


def _add_bench_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--index", required=True)
    p.add_argument("--csv", required=True, help="the dataset the index was built from")
    p.add_argument("--no-scale", action="store_true", help="the index was built with --no-scale")
    p.add_argument("--queries", type=_positive_int, default=50)
    p.add_argument("--reps", type=_positive_int, default=5)
    p.add_argument("--methods", type=_methods, default=list(METHODS))
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--workers", type=_positive_int, default=4)


def build_parser(settings: Optional[config.Settings] = None) -> argparse.ArgumentParser:
    settings = settings if settings is not None else config.Settings()
    parser = _Parser(prog="hoctree", description="HOC-Tree spatio-temporal range search")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--n", type=_non_negative_int, required=True)
    p.add_argument("--kind", choices=["uniform", "clustered"], default="uniform")
    p.add_argument("--clusters", type=_positive_int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build an index file from a CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--L", type=int, default=settings.default_L)
    p.add_argument("--psi", type=int, default=settings.default_psi)
    p.add_argument("--no-scale", action="store_true", help="take coordinates as they are")
    p.add_argument("--no-tags", action="store_true", help="omit MBRSign tags from the file")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("query", help="run one range query")
    p.add_argument("--index", required=True)
    for flag in ("--x-min", "--x-max", "--y-min", "--y-max", "--t-start", "--t-end"):
        p.add_argument(flag, type=float, required=True)
    p.add_argument("--format", choices=["ids", "json"], default="ids")
    p.add_argument("--verify", action="store_true", help="compare against a linear scan")
    p.add_argument("--no-mbr", action="store_true", help="skip MBRSign pruning")
    p.add_argument("--parallel", action="store_true")
    p.add_argument("--workers", type=_positive_int, default=4)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="time index methods against the linear scan")
    _add_bench_flags(p)
    p.add_argument("--spatial-extent", type=float, default=600.0)
    p.add_argument("--temporal-extent", type=float, default=600.0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("sweep", help="bench over a range of query extents")
    _add_bench_flags(p)
    p.add_argument("--axis", choices=["spatial", "temporal", "both"], default="both")
    p.add_argument("--extents", type=_extents, default=[200.0, 400.0, 600.0, 800.0, 1000.0])
    p.add_argument("--fixed", type=float, default=600.0, help="extent of the axis not being varied")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("info", help="print tree statistics of an index file")
    p.add_argument("--index", required=True)
    p.set_defaults(func=cmd_info)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = config.load_settings()
    except ConfigError as e:
        _note(f"❌ {e}")
        return EXIT_DATA
    logging.basicConfig(
        level=settings.log_level,
        format='%(asctime)s - %(levelname)s - %(message)s',
    )
    try:
        args = build_parser(settings).parse_args(argv)
        args.settings = settings
        if getattr(args, "psi", 1) < 1:
            raise UsageError(f"--psi must be >= 1, got {args.psi}")
        if not 1 <= getattr(args, "L", 1) <= 16:
            raise UsageError(f"--L must be in [1, 16], got {args.L}")
        return args.func(args)
    except UsageError as e:
        _note(f"❌ {e}")
        return EXIT_USAGE
    except VerificationError as e:
        _note(f"❌ verification failed: {e}")
        return EXIT_VERIFY
    except HOCTreeError as e:
        _note(f"❌ {e}")
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
