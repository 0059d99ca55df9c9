import json

import numpy as np
import pytest

import dropggm


def band_data(p=10, n=400, seed=2):
    g = dropggm.generate_graph("band", p, seed)
    x = dropggm.sample(g["covariance"], n, seed)
    return g, x


def test_normal_quantile():
    assert dropggm.normal_quantile(0.5) == 0.0
    assert dropggm.normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    with pytest.raises(ValueError):
        dropggm.normal_quantile(1.0)


def test_npn_three_points():
    x = np.array([[5.0, 1.0], [1.0, 2.0], [9.0, 3.0]])
    t = dropggm.npn_transform(x)
    assert t[:, 0] == pytest.approx([0.0, -0.9674216, 0.9674216], abs=1e-6)


def test_constant_column_raises():
    x = np.column_stack([np.arange(5.0), np.ones(5)])
    with pytest.raises(dropggm.DropError):
        dropggm.npn_transform(x)


def test_skeptic_is_a_correlation_matrix():
    _, x = band_data()
    for f in (dropggm.kendall_skeptic, dropggm.spearman_skeptic):
        r = f(x)
        assert np.allclose(r, r.T)
        assert np.allclose(np.diag(r), 1.0)


def test_graph_and_sample_shapes():
    g, x = band_data()
    assert x.shape == (400, 10)
    assert int(g["adjacency"].sum()) == 2 * 17
    assert np.all(np.linalg.eigvalsh(g["precision"]) > 0)


def test_fit_and_select_recover_the_band():
    g, x = band_data()
    fit = dropggm.fit_drop(x, 1e6)
    assert fit["edges"] == 0
    sel = dropggm.select_lambda(x)
    assert sel["converged"]
    m = dropggm.edge_metrics(sel["adjacency"], g["adjacency"])
    assert m["recall"] == 1.0
    assert m["f1"] > 0.8
    tr = sel["trace"]
    assert tr["lambdas"][tr["chosen_index"]] == sel["lambda"]


def test_baselines_run():
    g, x = band_data()
    for method in ("glasso", "mb", "npn", "kendall", "spearman"):
        r = dropggm.run_baseline(method, x)
        assert r["adjacency"].shape == (10, 10)
    with pytest.raises(dropggm.DropError):
        dropggm.run_baseline("clime", x)


def test_metrics_and_modularity():
    two = np.zeros((6, 6))
    for i, j in [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]:
        two[i, j] = two[j, i] = 1
    assert dropggm.modularity(two, [0, 0, 0, 1, 1, 1]) == pytest.approx(0.5)
    assert dropggm.louvain(two) == [0, 0, 0, 1, 1, 1]
    m = dropggm.edge_metrics(two, two)
    assert m["f1"] == 1.0 and m["fp"] == 0


def test_benchmark_is_reproducible():
    cfg = json.dumps({"graph_type": "band", "p": 8, "n": 100, "replicates": 2, "seed": 4})
    a = dropggm.run_benchmark(cfg, ["drop", "glasso"])
    b = dropggm.run_benchmark(cfg, ["drop", "glasso"])
    assert a == b
    report = json.loads(a)
    assert report["schema"] == "drop-benchmark-report"
    assert [s["method"] for s in report["summaries"]] == ["drop", "glasso"]
