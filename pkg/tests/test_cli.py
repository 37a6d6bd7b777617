import json

import numpy as np
import pytest

from blkp.cli import CliError, compute_gaps, main
from blkp.graphrep import DEFAULT_NORM
from blkp.pnanet import ModelParams, PnaConfig, save_checkpoint


@pytest.fixture
def instance_dir(tmp_path):
    d = tmp_path / "instances"
    rc = main(["generate", "--n1", "4", "--n2", "4", "--count", "6",
               "--data-type", "UC", "--value-max", "30", "--seed", "100",
               "--out", str(d)])
    assert rc == 0
    return d


@pytest.fixture
def checkpoint(tmp_path):
    path = tmp_path / "model.json"
    params = ModelParams(PnaConfig(), seed=0)
    save_checkpoint(params, DEFAULT_NORM, {}, path)
    return path


def test_compute_gaps_examples():
    assert compute_gaps({"a": 100}, {"a": 100}) == (0.0, 0.0)
    assert compute_gaps({"a": 99}, {"a": 100}) == (1.0, 1.0)
    avg, mx = compute_gaps({"a": 100, "b": 96}, {"a": 100, "b": 100})
    assert (avg, mx) == (2.0, 4.0)


def test_compute_gaps_missing_exact():
    with pytest.raises(CliError, match="missing exact"):
        compute_gaps({"a": 1}, {})


def test_generate_writes_files(instance_dir):
    files = list(instance_dir.glob("*.json"))
    assert len(files) == 6


def test_exact_subcommand(instance_dir, tmp_path):
    out = tmp_path / "exact.json"
    rc = main(["exact", "--instances", str(instance_dir), "--format", "json",
               "--out", str(out)])
    assert rc == 0
    records = json.loads(out.read_text())["records"]
    assert len(records) == 6
    assert all(r["proven_optimal"] for r in records)


def test_label_and_train_and_solve(instance_dir, tmp_path):
    labels = tmp_path / "labels.tsv"
    rc = main(["label", "--instances", str(instance_dir), "--k", "5",
               "--out", str(labels)])
    assert rc == 0
    lines = labels.read_text().splitlines()
    assert lines[0].split("\t") == ["instance", "leader_value", "x"]
    assert len(lines) > 6

    ckpt = tmp_path / "model.json"
    hist = tmp_path / "history.tsv"
    rc = main(["train", "--instances", str(instance_dir),
               "--labels", str(labels), "--epochs", "3", "--patience", "3",
               "--split", "0.5", "--out", str(ckpt), "--history", str(hist)])
    assert rc == 0
    assert ckpt.exists()
    assert hist.read_text().startswith("epoch\t")

    out = tmp_path / "solve.json"
    rc = main(["solve", "--instance", str(instance_dir),
               "--checkpoint", str(ckpt), "--theta", "0.2",
               "--n-samples", "5", "--format", "json", "--out", str(out)])
    assert rc == 0
    results = json.loads(out.read_text())["results"]
    assert len(results) == 6
    assert all(r["best_value"] >= 0 for r in results)


def test_bench_report(instance_dir, checkpoint, tmp_path):
    out = tmp_path / "report.json"
    rc = main(["bench", "--instances", str(instance_dir),
               "--checkpoint", str(checkpoint), "--n-samples", "5",
               "--format", "json", "--out", str(out)])
    assert rc == 0
    rows = json.loads(out.read_text())["report"]
    methods = {r["method"] for r in rows}
    assert "exact" in methods and "no_sampling" in methods
    for r in rows:
        assert r["avg_gap_pct"] <= r["max_gap_pct"] + 1e-12
        if r["method"] == "exact":
            assert r["avg_gap_pct"] == 0.0
        else:
            assert r["avg_gap_pct"] >= 0.0
        assert "checkpoint_hash" in r


def test_bench_sampling_monotone_in_n(instance_dir, checkpoint, tmp_path):
    objs = {}
    for n in (2, 20):
        out = tmp_path / f"report{n}.json"
        rc = main(["bench", "--instances", str(instance_dir),
                   "--checkpoint", str(checkpoint), "--n-samples", str(n),
                   "--theta", "0.2", "--seed", "5",
                   "--format", "json", "--out", str(out)])
        assert rc == 0
        rows = json.loads(out.read_text())["report"]
        row = [r for r in rows if r["method"].startswith("sampling")][0]
        objs[n] = row["avg_obj"]
    assert objs[20] >= objs[2]


def test_bench_reproducible(instance_dir, checkpoint, tmp_path):
    texts = []
    for k in range(2):
        out = tmp_path / f"r{k}.tsv"
        rc = main(["bench", "--instances", str(instance_dir),
                   "--checkpoint", str(checkpoint), "--seed", "7",
                   "--out", str(out)])
        assert rc == 0
        # timing columns vary run to run; compare everything else
        rows = [ln.split("\t") for ln in out.read_text().splitlines()]
        header = rows[0]
        ti = header.index("avg_time_s")
        texts.append([[c for i, c in enumerate(r) if i != ti] for r in rows])
    assert texts[0] == texts[1]


def test_missing_file_errors(tmp_path, capsys):
    rc = main(["exact", "--instances", str(tmp_path / "nope")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_bad_checkpoint_errors(instance_dir, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    rc = main(["solve", "--instance", str(instance_dir),
               "--checkpoint", str(bad)])
    assert rc == 1
    assert "error:" in capsys.readouterr().err
