import json
from pathlib import Path

import numpy as np
import pytest

from caeac import bench
from caeac.bench import ConfigError, DataError, Dataset, TrialConfig

IRIS = Path(__file__).resolve().parents[1] / "datasets" / "iris.csv"


def blob_dataset(seed=0, n=40, sep=20.0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, size=(n, 2)), rng.normal(sep, 1, size=(n, 2))])
    return Dataset("blobs", X, ["a"] * n + ["b"] * n)


def test_load_iris():
    ds = bench.load_csv(IRIS, "species")
    assert (ds.n, ds.d, len(ds.classes)) == (150, 4, 3)
    assert bench.load_csv(IRIS, -1).X.tolist() == ds.X.tolist()


def test_load_csv_variants(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1,0.5,2\n2,1.5,3\n\n1,2.5,4\n")
    ds = bench.load_csv(p, 0, header=False)
    assert ds.y == ["1", "2", "1"]
    np.testing.assert_array_equal(ds.X, [[0.5, 2], [1.5, 3], [2.5, 4]])
    w = tmp_path / "d.txt"
    w.write_text("0.5  2\t1\n1.5 3    2\n")
    assert bench.load_csv(w, -1, header=False, delimiter=None).y == ["1", "2"]


@pytest.mark.parametrize(
    "text,label,match",
    [
        ("a,b,y\n1,2,x\n1,q,x\n", "y", r":3: non-numeric"),
        ("a,b,y\n1,2,x\n1,2\n", "y", r":3: expected 3 fields"),
        ("a,b,y\n1,2,x\n", "z", "not found"),
        ("a,b,y\n1,2,x\n", "7", "out of range"),
        ("a,b,y\n", "y", "no data rows"),
        ("a,b,y\n1,,x\n", "y", "non-numeric"),
        ("a,b,y\n1,nan,x\n", "y", "non-finite"),
        ("a,b,y\n1,2, \n", "y", "empty label"),
        ("y\nx\n", "y", "at least one feature"),
    ],
)
def test_load_csv_errors(tmp_path, text, label, match):
    p = tmp_path / "bad.csv"
    p.write_text(text)
    with pytest.raises(DataError, match=match):
        bench.load_csv(p, label)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such file"):
        bench.load_csv(tmp_path / "nope.csv")


def test_normalize():
    X = bench.min_max_normalize(np.array([[0.0, 5.0], [2.0, 5.0], [1.0, 5.0]]))
    np.testing.assert_array_equal(X, [[0.0, 0.0], [1.0, 0.0], [0.5, 0.0]])


@pytest.mark.parametrize(
    "kw",
    [
        {"variant": "foo"},
        {"lam": 7},
        {"a_max": 0},
        {"trials": 0},
        {"eval_mode": "cv"},
        {"holdout_fraction": 1.0},
        {"predict_metric": "l1"},
    ],
)
def test_trial_config_errors(kw):
    with pytest.raises(ConfigError):
        TrialConfig(**kw)


def test_trial_rng_is_pcg64_seedsequence():
    a = bench.trial_rng(7, 3).permutation(20)
    b = np.random.Generator(np.random.PCG64(np.random.SeedSequence([7, 3]))).permutation(20)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, bench.trial_rng(7, 4).permutation(20))


def test_worker_count(monkeypatch):
    monkeypatch.setenv("CAEAC_THREADS", "3")
    assert bench.worker_count() == 3
    monkeypatch.setenv("CAEAC_THREADS", "junk")
    assert bench.worker_count() >= 1
    assert bench.worker_count(2) == 2


def test_run_trials_report():
    rep = bench.run_trials(blob_dataset(), TrialConfig(lam=10, a_max=4, trials=3, seed=5))
    assert rep["schema_version"] == bench.SCHEMA_VERSION
    assert rep["config"]["eval_mode"] == "train" and "PCG64" in rep["prng"]
    assert len(rep["trials"]) == 3 and rep["n_failed"] == 0
    for t in rep["trials"]:
        assert t["accuracy"] == 1.0 and t["node_count"] >= 2 and t["cluster_count"] >= 2
    assert rep["mean"]["accuracy"] == 1.0 and rep["std"]["accuracy"] == 0.0
    json.dumps(rep)


def test_reports_are_reproducible_and_thread_independent():
    ds = bench.load_csv(IRIS, "species")
    cfg = TrialConfig(lam=20, a_max=6, trials=4, seed=11, eval_mode="holdout")
    one = bench.strip_timing(bench.run_trials(ds, cfg, workers=1))
    many = bench.strip_timing(bench.run_trials(ds, cfg, workers=4))
    assert json.dumps(one, sort_keys=True) == json.dumps(many, sort_keys=True)
    assert "train_seconds" not in one["trials"][0]


def test_holdout_split_sizes():
    rep = bench.run_trials(blob_dataset(), TrialConfig(lam=10, a_max=4, trials=2, eval_mode="holdout", holdout_fraction=0.25))
    assert rep["n_failed"] == 0 and rep["config"]["holdout_fraction"] == 0.25


def test_single_class_dataset():
    ds = Dataset("one", np.random.default_rng(0).normal(size=(30, 2)), ["k"] * 30)
    rep = bench.run_trials(ds, TrialConfig(lam=10, a_max=4, trials=2))
    assert rep["mean"]["accuracy"] == 1.0
    assert all(t["cluster_count"] >= 1 for t in rep["trials"])


def test_trial_errors_are_recorded():
    ds = Dataset("bad", np.array([[0.0, np.nan], [1.0, 1.0]]), ["a", "b"])
    rep = bench.run_trials(ds, TrialConfig(lam=4, a_max=2, trials=2))
    assert rep["n_failed"] == 2 and rep["excluded"]
    assert rep["mean"]["accuracy"] is None
    assert "finite" in rep["trials"][0]["error"]


def test_grid_search_single_cell():
    g = bench.grid_search(blob_dataset(), "base", [10], [4], trials=2, seed=1)
    assert g["best"]["lam"] == 10 and g["best"]["a_max"] == 4
    assert len(g["cells"]) == 1


def test_grid_best_is_argmax_with_ties():
    ds = bench.load_csv(IRIS, "species")
    g = bench.grid_search(ds, "base", [10, 20], [2, 4], trials=2, seed=3, eval_mode="holdout")
    accs = [c["mean"]["accuracy"] for c in g["cells"]]
    assert g["best"]["mean"]["accuracy"] == max(accs)
    assert g["best"] == bench.pick_best(g["cells"])
    # all cells perfect on separable blobs: tie goes to smallest lambda, then a_max
    g2 = bench.grid_search(blob_dataset(), "base", [20, 10], [6, 4], trials=1)
    assert (g2["best"]["lam"], g2["best"]["a_max"]) == (10, 4)


def test_grid_excludes_failing_cells():
    def fake(acc, lam, excluded=False):
        return {"excluded": excluded, "mean": {"accuracy": acc}, "std": {}, "config": {"lam": lam, "a_max": 2}}

    cells = [fake(None, 10, True), fake(0.5, 20), fake(0.5, 30)]
    assert bench.pick_best(cells)["lam"] == 20
    assert bench.pick_best(cells[:1]) is None


def test_grid_empty():
    with pytest.raises(ConfigError):
        bench.grid_search(blob_dataset(), "base", [], [2])


def test_compare_algorithms():
    res = bench.compare_algorithms({"x": [0.9, 0.8, 0.95, 0.7], "y": [0.5, 0.6, 0.4, 0.3], "z": [0.6, 0.5, 0.5, 0.4]})
    assert res["rank_listing"][0][0] == "x"
    assert res["mean_ranks"]["x"] == 1.0
    assert res["schema_version"] == bench.SCHEMA_VERSION
    json.dumps(res)
    with pytest.raises(ConfigError):
        bench.compare_algorithms({"x": [1.0, 2.0]})
    with pytest.raises(ConfigError):
        bench.compare_algorithms({"x": [1.0, 2.0], "y": [1.0]})
    with pytest.raises(ConfigError):
        bench.compare_algorithms({"x": [1.0], "y": [1.0]})


def test_measurements_table():
    ds = blob_dataset()
    a = bench.run_trials(ds, TrialConfig(lam=10, a_max=4, trials=2))
    b = bench.grid_search(ds, "individual", [10], [4], trials=2)
    table = bench.measurements_table({"base": [a], "ind": [b]})
    assert table == {"base": [1.0, 1.0, 1.0], "ind": [1.0, 1.0, 1.0]}
    per = bench.measurements_table({"base": [a], "ind": [b]}, ["accuracy"], per_trial=True)
    assert len(per["base"]) == 2


def test_compare_hand_ranked_slice():
    # ranks worked out by hand: base 1,2,1,1.5,3  individual 2,1,3,1.5,1  clustering 3,3,2,3,2
    table = {
        "base": [0.96, 0.90, 0.88, 0.70, 0.50],
        "individual": [0.95, 0.91, 0.80, 0.70, 0.60],
        "clustering": [0.90, 0.85, 0.82, 0.65, 0.55],
    }
    res = bench.compare_algorithms(table)
    assert res["mean_ranks"] == {"base": 8.5 / 5, "individual": 8.5 / 5, "clustering": 13 / 5}
    assert [name for name, _ in res["rank_listing"]] == ["base", "individual", "clustering"]
