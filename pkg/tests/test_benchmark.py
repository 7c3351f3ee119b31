import pytest

from src.errors import DomainError
from src.index.hoc_tree import HOCTree, build
from src.search import benchmark
from src.search.benchmark import random_queries, run_bench, selectivity
from src.search.range_search import QueryStats


def test_random_queries_fit_in_domain(default_cfg):
    boxes = random_queries(default_cfg, 600.0, 600.0, 100, seed=1)
    assert len(boxes) == 100
    for q in boxes:
        assert default_cfg.x_lo <= q.x_min and q.x_max <= default_cfg.x_hi
        assert q.x_max - q.x_min == pytest.approx(600.0)
        assert q.t_end - q.t_start == pytest.approx(600.0)
    assert boxes == random_queries(default_cfg, 600.0, 600.0, 100, seed=1)


def test_selectivity(default_cfg):
    assert selectivity(default_cfg, 600.0, 600.0) == pytest.approx(0.000432)
    assert selectivity(default_cfg, 20000.0, 9000.0) == 1.0


def test_methods_are_timed_back_to_back_on_each_box(default_cfg, monkeypatch):
    """Test the timed loop runs every method on a box before the next box, rotating the leading method."""
    calls = []

    def recording_search(tree, q, use_mbr=True, parallel=False, workers=4):
        calls.append(("hoc" if use_mbr else "hoc-notag", q))
        return set(), QueryStats()

    monkeypatch.setattr(benchmark, "range_search", recording_search)
    report = run_bench(HOCTree(default_cfg), [], queries=4, reps=2, methods=["hoc", "hoc-notag"], seed=3)
    boxes = random_queries(default_cfg, 600.0, 600.0, 4, seed=3)

    timed = calls[2 * len(boxes):]
    assert len(timed) == 2 * len(boxes) * 2
    pairs = [timed[i:i + 2] for i in range(0, len(timed), 2)]
    assert [[q for _, q in pair] for pair in pairs] == [[q, q] for q in boxes * 2]
    leading = [pair[0][0] for pair in pairs]
    assert leading == ["hoc", "hoc-notag"] * 4
    assert [m.runs for m in report.methods] == [2, 2]
    assert "interleaved" in report.timing


def test_run_bench_stats_and_agreement(default_cfg, clustered_10k):
    tree = build(clustered_10k, default_cfg)
    report = run_bench(tree, clustered_10k, queries=10, reps=1, seed=4)
    hoc, notag, scan = report.methods
    assert hoc.stats.results == notag.stats.results
    assert hoc.stats.candidates_refined <= notag.stats.candidates_refined
    assert notag.stats.leaves_pruned_by_mbr == 0
    assert scan.stats is None


def test_run_bench_rejects_bad_arguments(default_cfg):
    tree = HOCTree(default_cfg)
    with pytest.raises(DomainError):
        run_bench(tree, [], reps=0)
    with pytest.raises(DomainError):
        run_bench(tree, [], methods=[])
    with pytest.raises(DomainError):
        run_bench(tree, [], methods=["rtree"])
