import importlib
import json

import pytest

from src import config
from src.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main
from src.db.index_store import load
from src.search import range_search as rs


@pytest.fixture
def dataset(tmp_path):
    """A generated 2000-point CSV and its index file."""
    csv_path = tmp_path / "un.csv"
    index_path = tmp_path / "un.hoc"
    assert main(["gen", "--n", "2000", "--seed", "3", "--out", str(csv_path)]) == EXIT_OK
    assert main(["build", "--csv", str(csv_path), "--out", str(index_path), "--psi", "16"]) == EXIT_OK
    return csv_path, index_path


def _query_args(index_path, x=(0, 10000), y=(0, 10000), t=(0, 5000)):
    return [
        "query", "--index", str(index_path),
        "--x-min", str(x[0]), "--x-max", str(x[1]),
        "--y-min", str(y[0]), "--y-max", str(y[1]),
        "--t-start", str(t[0]), "--t-end", str(t[1]),
    ]


# -- environment ----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, value", [("HOC_DEFAULT_PSI", "lots"), ("HOC_X_MAX", "far"), ("HOC_LOG_LEVEL", "chatty")]
)
def test_bad_environment_value_is_a_data_error(tmp_path, monkeypatch, capsys, name, value):
    monkeypatch.setenv(name, value)
    importlib.reload(config)
    assert main(["gen", "--n", "5", "--out", str(tmp_path / "x.csv")]) == EXIT_DATA
    err = capsys.readouterr().err
    assert "❌" in err and name in err
    assert not (tmp_path / "x.csv").exists()


def test_environment_overrides_defaults(tmp_path, monkeypatch):
    monkeypatch.setenv("HOC_DEFAULT_PSI", "32")
    monkeypatch.setenv("HOC_DEFAULT_SEED", "5")
    csv_path, index_path = tmp_path / "a.csv", tmp_path / "a.hoc"
    assert main(["gen", "--n", "50", "--out", str(csv_path)]) == EXIT_OK
    assert main(["build", "--csv", str(csv_path), "--out", str(index_path)]) == EXIT_OK
    assert load(index_path).config.psi == 32
    other = tmp_path / "b.csv"
    assert main(["gen", "--n", "50", "--seed", "5", "--out", str(other)]) == EXIT_OK
    assert csv_path.read_bytes() == other.read_bytes()


# -- gen ----------------------------------------------------------------------------------------


def test_gen_zero_writes_header_only(tmp_path):
    out = tmp_path / "empty.csv"
    assert main(["gen", "--n", "0", "--out", str(out)]) == EXIT_OK
    assert out.read_text() == "id,lon,lat,timestamp\n"


def test_gen_is_byte_identical_for_same_seed(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["gen", "--n", "300", "--kind", "clustered", "--clusters", "3", "--sigma", "50",
                     "--seed", "9", "--out", str(out)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_gen_clustered_defaults_are_reported(tmp_path, capsys):
    assert main(["gen", "--n", "100", "--kind", "clustered", "--out", str(tmp_path / "c.csv")]) == EXIT_OK
    assert "clustered defaults applied" in capsys.readouterr().err


def test_gen_bad_flags(tmp_path):
    assert main(["gen", "--n", "-1", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert main(["gen", "--n", "10", "--kind", "zipf", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert main(["frobnicate"]) == EXIT_USAGE


# -- build ----------------------------------------------------------------------------------------


def test_build_empty_csv(tmp_path, capsys):
    csv_path, index_path = tmp_path / "e.csv", tmp_path / "e.hoc"
    csv_path.write_text("id,lon,lat,timestamp\n")
    assert main(["build", "--csv", str(csv_path), "--out", str(index_path)]) == EXIT_OK
    tree = load(index_path)
    assert tree.object_count == 0
    settings = config.load_settings()
    assert (tree.config.L, tree.config.psi) == (settings.default_L, settings.default_psi)
    summary = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert summary["object_count"] == 0 and summary["file_bytes"] == index_path.stat().st_size


def test_build_rejects_psi_zero(tmp_path):
    csv_path = tmp_path / "e.csv"
    csv_path.write_text("id,lon,lat,timestamp\n")
    assert main(["build", "--csv", str(csv_path), "--out", str(tmp_path / "e.hoc"), "--psi", "0"]) == EXIT_USAGE


def test_build_reports_parse_errors_with_location(tmp_path, capsys):
    csv_path = tmp_path / "bad.csv"
    csv_path.write_text("id,lon,lat,timestamp\na,1,2,3\nb,1,2\n")
    assert main(["build", "--csv", str(csv_path), "--out", str(tmp_path / "b.hoc")]) == EXIT_DATA
    assert f"{csv_path}:3:" in capsys.readouterr().err


def test_build_reports_undecodable_bytes_as_data_error(tmp_path, capsys):
    csv_path = tmp_path / "bytes.csv"
    csv_path.write_bytes(b"id,lon,lat,timestamp\n\xff\xfe,1,2,3\n")
    assert main(["build", "--csv", str(csv_path), "--out", str(tmp_path / "b.hoc")]) == EXIT_DATA
    assert f"{csv_path}:2:" in capsys.readouterr().err
    assert not (tmp_path / "b.hoc").exists()


def test_build_missing_csv(tmp_path):
    assert main(["build", "--csv", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "x.hoc")]) == EXIT_DATA


# -- query ----------------------------------------------------------------------------------------


def test_query_full_domain_lists_all_ids(dataset, capsys):
    _, index_path = dataset
    capsys.readouterr()
    assert main(_query_args(index_path)) == EXIT_OK
    out = capsys.readouterr()
    ids = out.out.split()
    assert len(ids) == 2000
    assert ids == sorted(ids)
    assert json.loads(out.err.strip().splitlines()[-1])["results"] == 2000


def test_query_disjoint_json(dataset, capsys):
    _, index_path = dataset
    capsys.readouterr()
    assert main(_query_args(index_path, x=(20000, 30000)) + ["--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["ids"] == [] and payload["stats"]["results"] == 0


def test_query_verify(dataset, capsys):
    _, index_path = dataset
    assert main(_query_args(index_path, x=(1000, 4000), y=(2000, 5000), t=(0, 2500)) + ["--verify"]) == EXIT_OK
    assert "verified" in capsys.readouterr().err


def test_query_verify_mismatch_exits_3(dataset, monkeypatch):
    _, index_path = dataset
    monkeypatch.setattr(rs, "range_search", lambda tree, q, **kw: (set(), rs.QueryStats()))
    assert main(_query_args(index_path) + ["--verify"]) == EXIT_VERIFY


def test_query_inverted_bounds(dataset):
    _, index_path = dataset
    assert main(_query_args(index_path, x=(500, 100))) == EXIT_USAGE


def test_query_bad_index_file(tmp_path):
    path = tmp_path / "junk.hoc"
    path.write_bytes(b"definitely not an index")
    assert main(_query_args(path)) == EXIT_DATA


# -- bench / sweep / info ------------------------------------------------------------------------------


def test_bench_report(dataset, capsys):
    csv_path, index_path = dataset
    capsys.readouterr()
    args = ["bench", "--index", str(index_path), "--csv", str(csv_path), "--queries", "5", "--reps", "2"]
    assert main(args) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert [m["method"] for m in report["methods"]] == ["hoc", "hoc-notag", "scan"]
    assert report["repetitions"] == 2 and report["queries"] == 5
    assert report["selectivity"] == pytest.approx((600 / 10000) ** 2 * (600 / 5000))
    assert report["index_bytes"] > report["index_bytes_without_tags"]
    assert report["build_seconds"] >= 0
    scan = report["methods"][2]
    assert scan["stats"] is None and scan["mean_ms"] >= 0


def test_bench_scan_only(dataset, capsys):
    csv_path, index_path = dataset
    capsys.readouterr()
    args = ["bench", "--index", str(index_path), "--csv", str(csv_path), "--methods", "scan", "--queries", "3",
            "--reps", "1"]
    assert main(args) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert [m["method"] for m in report["methods"]] == ["scan"]


def test_bench_aborts_when_methods_disagree(dataset, monkeypatch):
    from src.search import benchmark

    csv_path, index_path = dataset
    monkeypatch.setattr(benchmark, "scan_range", lambda objects, q: set())
    args = ["bench", "--index", str(index_path), "--csv", str(csv_path), "--methods", "hoc,scan",
            "--spatial-extent", "10000", "--temporal-extent", "5000", "--queries", "2", "--reps", "1"]
    assert main(args) == EXIT_VERIFY


def test_bench_rejects_mismatched_dataset(dataset, tmp_path):
    _, index_path = dataset
    other = tmp_path / "other.csv"
    assert main(["gen", "--n", "10", "--out", str(other)]) == EXIT_OK
    assert main(["bench", "--index", str(index_path), "--csv", str(other)]) == EXIT_DATA


def test_sweep_emits_one_line_per_point(dataset, capsys):
    csv_path, index_path = dataset
    capsys.readouterr()
    args = ["sweep", "--index", str(index_path), "--csv", str(csv_path), "--axis", "both", "--extents", "200,1000",
            "--queries", "3", "--reps", "1", "--methods", "hoc,scan"]
    assert main(args) == EXIT_OK
    lines = [json.loads(line) for line in capsys.readouterr().out.strip().splitlines()]
    assert [(p["axis"], p["extent"]) for p in lines] == [
        ("spatial", 200.0), ("spatial", 1000.0), ("temporal", 200.0), ("temporal", 1000.0)
    ]
    assert lines[0]["temporal_extent"] == 600.0 and lines[2]["spatial_extent"] == 600.0


def test_info(dataset, capsys):
    _, index_path = dataset
    capsys.readouterr()
    assert main(["info", "--index", str(index_path)]) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert info["object_count"] == 2000
    assert info["config"]["psi"] == 16
    assert info["tag_bytes"] == 16 * info["non_empty_leaf_count"]
