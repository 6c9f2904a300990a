import json

import numpy as np
import pytest
from click.testing import CliRunner

from bellwether.cli import main
from bellwether.synth import make_planted_community, write_community

FAST = ["--repeats", "2", "--trees", "8", "--bootstrap", "256"]


@pytest.fixture(scope="module")
def synthetic_manifest(tmp_path_factory):
    community = make_planted_community(n_sources=4, rows=60, seed=3)
    return write_community(community, tmp_path_factory.mktemp("community"))


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    return result


class TestValidate:
    def test_ok_lines(self, runner, synthetic_manifest):
        result = _invoke(runner, ["validate", "--manifest", str(synthetic_manifest)])
        assert result.exit_code == 0
        lines = [l for l in result.stdout.splitlines() if l.startswith("OK")]
        assert len(lines) == 4
        assert "positive" in lines[0]

    def test_schema_mismatch_diagnosed(self, runner, tmp_path):
        (tmp_path / "a.csv").write_text("loc,bug\n1,0\n2,1\n")
        (tmp_path / "b.csv").write_text("rfc,bug\n1,0\n2,1\n")
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({
            "name": "x", "task": "classification", "class_column": "bug",
            "datasets": [{"name": "a", "path": "a.csv"},
                         {"name": "b", "path": "b.csv"}],
        }))
        result = runner.invoke(main, ["validate", "--manifest", str(manifest)])
        assert result.exit_code == 3
        assert "SCHEMA MISMATCH" in result.stdout
        assert "rfc" in result.stdout

    def test_missing_manifest(self, runner):
        result = runner.invoke(main, ["validate", "--manifest", "nope.json"])
        assert result.exit_code == 2


class TestDiscover:
    def test_report_names_planted_source(self, runner, synthetic_manifest, tmp_path):
        out = tmp_path / "report.json"
        result = _invoke(runner, [
            "discover", "--manifest", str(synthetic_manifest),
            "--seed", "7", *FAST, "--out", str(out),
        ])
        assert result.exit_code == 0
        report = json.loads(out.read_text())
        assert report["schema_version"] == 1
        assert report["config"]["seed"] == 7
        assert report["result"]["verdict"] == "Found"
        assert report["result"]["overall_bellwether"] == ["planted"]
        assert (tmp_path / "report.json.meta.json").exists()

    def test_byte_identical_reports(self, runner, synthetic_manifest, tmp_path):
        args = ["discover", "--manifest", str(synthetic_manifest), "--seed", "5", *FAST]
        a = _invoke(runner, args + ["--workers", "1", "--out", str(tmp_path / "a.json")])
        b = _invoke(runner, args + ["--workers", "3", "--out", str(tmp_path / "b.json")])
        assert a.exit_code == b.exit_code == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_csv_projection(self, runner, synthetic_manifest):
        result = _invoke(runner, [
            "discover", "--manifest", str(synthetic_manifest), *FAST,
            "--format", "csv",
        ])
        assert result.exit_code == 0
        header = result.stdout.splitlines()[0]
        assert header.startswith("holdout,bellwethers,pooled_median")
        assert len(result.stdout.splitlines()) == 5  # header + 4 holdouts

    def test_unknown_strategy_exits_2(self, runner, synthetic_manifest):
        result = runner.invoke(main, [
            "discover", "--manifest", str(synthetic_manifest),
            "--strategy", "tca+",
        ])
        assert result.exit_code == 2
        assert "direct" in result.stderr

    def test_bad_manifest_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        result = runner.invoke(main, ["discover", "--manifest", str(bad)])
        assert result.exit_code == 2

    def test_bad_data_exits_3(self, runner, tmp_path):
        (tmp_path / "a.csv").write_text("loc,bug\n1,zero\n")
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({
            "name": "x", "task": "classification",
            "datasets": [{"name": "a", "path": "a.csv"}],
        }))
        result = runner.invoke(main, ["discover", "--manifest", str(manifest)])
        assert result.exit_code == 3


class TestRank:
    def test_identical_columns_share_rank(self, runner, tmp_path):
        path = tmp_path / "samples.csv"
        path.write_text("m1,m2\n" + "\n".join("0.5,0.5" for _ in range(20)) + "\n")
        result = _invoke(runner, ["rank", "--samples", str(path)])
        report = json.loads(result.stdout)
        assert report["result"]["groups"] == [[1, ["m1", "m2"]]]

    def test_separated_columns_csv_output(self, runner, tmp_path):
        rng = np.random.default_rng(0)
        rows = "\n".join(f"{10 + rng.normal(0, 0.01):.4f},{rng.normal(0, 0.01):.4f}"
                         for _ in range(30))
        path = tmp_path / "samples.csv"
        path.write_text("good,bad\n" + rows + "\n")
        result = _invoke(runner, ["rank", "--samples", str(path), "--format", "csv"])
        lines = result.stdout.splitlines()
        assert lines[0] == "rank,name,median"
        assert lines[1].startswith("1,good")
        assert lines[2].startswith("2,bad")


class TestTransfer:
    def test_pair_report(self, runner, synthetic_manifest):
        result = _invoke(runner, [
            "transfer", "--manifest", str(synthetic_manifest),
            "--source", "planted", "--target", "noisy1", *FAST,
        ])
        report = json.loads(result.stdout)
        assert report["result"]["source"] == "planted"
        assert len(report["result"]["scores"]["values"]) == 2

    def test_unknown_dataset_exits_2(self, runner, synthetic_manifest):
        result = runner.invoke(main, [
            "transfer", "--manifest", str(synthetic_manifest),
            "--source", "ghost", "--target", "noisy1",
        ])
        assert result.exit_code == 2


class TestMonitor:
    def _history_file(self, tmp_path, medians):
        rng = np.random.default_rng(0)
        doc = [
            {"source": "bw", "target": f"t{i}",
             "scores": list(np.round(rng.normal(m, 0.02, 10), 6))}
            for i, m in enumerate(medians)
        ]
        path = tmp_path / "history.json"
        path.write_text(json.dumps(doc))
        return path

    def test_degraded(self, runner, tmp_path):
        path = self._history_file(tmp_path, [0.7] * 5 + [0.3] * 5)
        result = _invoke(runner, ["monitor", "--history", str(path)])
        assert json.loads(result.stdout)["result"]["state"] == "Degraded"

    def test_ok(self, runner, tmp_path):
        path = self._history_file(tmp_path, [0.7] * 10)
        result = _invoke(runner, ["monitor", "--history", str(path)])
        assert json.loads(result.stdout)["result"]["state"] == "OK"


def test_compare_methods(runner, tmp_path):
    rng = np.random.default_rng(1)
    doc = [
        {"context": f"c{i}",
         "methods": {"strong": list(0.9 + rng.normal(0, 0.005, 15)),
                     "weak": list(0.1 + rng.normal(0, 0.005, 15))}}
        for i in range(3)
    ]
    path = tmp_path / "contexts.json"
    path.write_text(json.dumps(doc))
    result = _invoke(runner, ["compare-methods", "--contexts", str(path)])
    table = {row["method"]: row for row in json.loads(result.stdout)["result"]}
    assert table["strong"]["wins"] == 3
    assert table["weak"]["losses"] == 3


def test_incremental_and_within(runner, tmp_path):
    # versioned community: two versions of each of three projects
    from bellwether.data import ProjectDataset, TaskKind, make_community

    rng = np.random.default_rng(2)
    datasets = []
    for p in range(3):
        for tag in ("1.0", "2.0"):
            feats = rng.random((50, 3))
            labels = (feats[:, 0] > 0.5).astype(float)
            datasets.append(ProjectDataset(f"p{p}", ("f0", "f1", "f2"), feats,
                                           labels, TaskKind.CLASSIFICATION, version=tag))
    community = make_community("versioned", datasets, TaskKind.CLASSIFICATION)
    manifest = write_community(community, tmp_path)

    result = _invoke(runner, [
        "incremental", "--manifest", str(manifest), "--project", "p0", *FAST,
    ])
    report = json.loads(result.stdout)
    assert report["result"]["unions"][0] == "p0[2.0]"

    result = _invoke(runner, [
        "within-vs-bellwether", "--manifest", str(manifest), *FAST,
    ])
    rows = json.loads(result.stdout)["result"]
    assert {r["project"] for r in rows} == {"p0", "p1", "p2"}


def test_instability(runner, synthetic_manifest):
    result = _invoke(runner, [
        "instability", "--manifest", str(synthetic_manifest), "--top-k", "3",
        "--bellwether", "planted", *FAST,
    ])
    rows = json.loads(result.stdout)["result"]
    assert len(rows) == 4
    planted = next(r for r in rows if r["source"] == "planted")
    assert planted["is_bellwether"]
    assert len(planted["top_features"]) <= 3
