# Copyright 2026 The nbrec Authors. Licensed under the Apache License 2.0.

import math
import os

import numpy as np
import pytest

import nbrec


def test_kernels():
    assert nbrec.kernel_eval("epanechnikov", 0.0) == pytest.approx(0.75)
    assert nbrec.kernel_eval("epanechnikov", 1.5) == 0.0
    assert nbrec.kernel_mu2("gaussian") == pytest.approx(1.0)
    assert nbrec.kernel_roughness("gaussian") == pytest.approx(1 / (2 * math.sqrt(math.pi)))
    with pytest.raises(nbrec.ConfigError):
        nbrec.kernel_eval("cubic", 0.0)


def test_ideal_naive_ips_dr():
    rng = np.random.default_rng(0)
    rhat = rng.uniform(1, 5, (6, 7))
    r = rng.uniform(1, 5, (6, 7))
    ideal = nbrec.ideal_loss(rhat, r)
    assert ideal == pytest.approx(np.mean((rhat - r) ** 2))
    full = np.ones_like(r)
    assert nbrec.naive_loss(rhat, r, full) == pytest.approx(ideal)
    assert nbrec.ips_loss(rhat, r, full, full) == pytest.approx(ideal)
    p = rng.uniform(0.2, 0.9, r.shape)
    mask = (rng.uniform(size=r.shape) < p).astype(float)
    perfect = (rhat - r) ** 2
    assert nbrec.dr_loss(rhat, r, mask, p, perfect) == pytest.approx(ideal)
    with pytest.raises(nbrec.DataError):
        nbrec.ideal_loss(rhat, r[:, :3])


def test_neighborhood_estimators_reduce_to_baselines():
    rng = np.random.default_rng(1)
    shape = (5, 6)
    rhat = rng.uniform(1, 5, shape)
    r = rng.uniform(1, 5, shape)
    p = rng.uniform(0.2, 0.9, shape)
    mask = (rng.uniform(size=shape) < p).astype(float)
    g = np.ones(shape)
    ips = nbrec.ips_loss(rhat, r, mask, p)
    total, per_g = nbrec.n_ips_loss(rhat, r[None], mask, g, p[None], [1.0], [1.0])
    assert total == pytest.approx(ips, abs=1e-12)
    assert per_g == pytest.approx([ips])
    imputed = 0.5 * (rhat - r) ** 2
    dr = nbrec.dr_loss(rhat, r, mask, p, imputed)
    total, _ = nbrec.n_dr_loss(rhat, r[None], mask, g, p[None], imputed[None], [1.0], [1.0])
    assert total == pytest.approx(dr, abs=1e-12)


def test_n_dr_perfect_imputation_is_ideal():
    rng = np.random.default_rng(2)
    shape = (6, 6)
    rhat = rng.uniform(1, 5, shape)
    pots = rng.uniform(1, 5, (2,) + shape)
    mask = (rng.uniform(size=shape) < 0.5).astype(float)
    rep = nbrec.neighbor_rep(mask, threshold=3.0)[..., 0]
    joint = rng.uniform(0.1, 0.5, (2,) + shape)
    perfect = (rhat[None] - pots) ** 2
    total, _ = nbrec.n_dr_loss(rhat, pots, mask, rep, joint, perfect, [0.0, 1.0], [0.5, 0.5])
    ideal = nbrec.ideal_loss_n(rhat, pots, [0.0, 1.0], [0.5, 0.5])
    assert total == pytest.approx(ideal, abs=1e-12)


def test_neighbor_rep_counts():
    mask = np.array([[1, 1, 0], [0, 1, 0]], dtype=float)
    counts = nbrec.neighbor_rep(mask, kind="count")
    assert counts.shape[:2] == (2, 3)
    assert set(np.unique(nbrec.neighbor_rep(mask))) <= {0.0, 1.0}


def test_metrics():
    assert nbrec.auc([0.1, 0.9, 0.4, 0.8], [0, 1, 0, 1]) == 1.0
    assert nbrec.ndcg_at_k([[3, 2, 1]], [[1, 0, 0]], 3) == pytest.approx(1.0)
    assert nbrec.relative_error(1.1, 1.0) == pytest.approx(0.1)
    with pytest.raises(nbrec.NumericError):
        nbrec.relative_error(1.0, 0.0)


def test_bandwidth_theory():
    h = nbrec.optimal_bandwidth()
    assert 0.05 < h < 0.5
    assert nbrec.optimal_bandwidth(n=4000) / h == pytest.approx(2 ** -0.2, rel=1e-9)
    assert abs(nbrec.analytic_bias(0.2)) > abs(nbrec.analytic_bias(0.1))
    out = nbrec.verify_bias_variance([0.1, 0.2], replications=20, n=200)
    assert len(out["rows"]) == 2
    for row in out["rows"]:
        assert row["mse"] == pytest.approx(row["bias"] ** 2 + row["variance"], rel=1e-9)
    with pytest.raises(nbrec.NumericError):
        nbrec.optimal_bandwidth(kappa=1.0)


def test_selection_gap():
    dep = nbrec.selection_gap(3, 2, 2, independent=False, seed=4)
    assert dep["gap_integral"] == pytest.approx(dep["ideal_n"] - dep["ideal"], abs=1e-12)
    ind = nbrec.selection_gap(3, 2, 2, independent=True, seed=4)
    assert ind["gap_integral"] == pytest.approx(0.0, abs=1e-12)


def test_config_hash_ignores_output_dir():
    a = nbrec.config_hash({"train.lr": "0.1", "output.dir": "/tmp/a"})
    b = nbrec.config_hash({"train.lr": "0.1", "output.dir": "/tmp/b"})
    c = nbrec.config_hash({"train.lr": "0.2"})
    assert a == b != c


def test_train_then_eval(tmp_path):
    train, test = nbrec.write_coat_like(str(tmp_path), 60, 50, 10, 6, 5)
    assert os.path.exists(train) and os.path.exists(test)
    cfg = {
        "data.train": train,
        "data.test": test,
        "output.dir": str(tmp_path / "run"),
        "train.trainer": "n-ips",
        "train.epochs": 3,
        "train.dim": 4,
        "ratio.epochs": 2,
        "propensity.mar_fraction": 0.2,
    }
    trained = nbrec.train(cfg)
    names = {m["metric"] for m in trained}
    assert {"mse", "mae", "auc"} <= names
    assert nbrec.evaluate(cfg) == trained
    with pytest.raises(nbrec.ConfigError):
        nbrec.train({**cfg, "train.bogus": 1})
