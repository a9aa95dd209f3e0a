"""Smoke tests for the python bindings: every bound operation runs and a few
known values hold."""

import math

import numpy as np
import pytest

import cogs


def test_tour_length_square():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert cogs.tour_length(square, [0, 1, 2, 3]) == pytest.approx(4.0)


def test_distance_matrix():
    pts = np.array([[0, 0], [0.6, 0.8]])
    d = cogs.distance_matrix(pts)
    assert d.shape == (2, 2)
    assert d[0, 1] == pytest.approx(1.0)
    assert d[0, 0] == 0.0


def test_optimality_gap():
    assert cogs.optimality_gap(11.0, 10.0) == pytest.approx(0.1)
    with pytest.raises(Exception):
        cogs.optimality_gap(1.0, 0.0)


def test_normalize():
    pts = np.array([[0, 0], [2, 0], [2, 2]], dtype=float)
    out = cogs.normalize_to_unit_square(pts)
    assert out.max() == pytest.approx(1.0)
    assert out.min() == pytest.approx(0.0)


def test_generators_deterministic_and_bounded():
    for sampler in (
        lambda s: cogs.sample_uniform(30, s),
        lambda s: cogs.sample_gaussian_mixture(30, 3, 0.1, s),
        lambda s: cogs.sample_diagonal(30, 0.1, 0.02, s),
        lambda s: cogs.sample_clustered_uniform(30, seed=s),
    ):
        a, b = sampler(7), sampler(7)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (30, 2)
        assert a.min() >= 0.0 and a.max() <= 1.0


def test_oracles_agree():
    inst = cogs.sample_uniform(9, 3)
    bf = cogs.brute_force(inst)
    hk = cogs.held_karp(inst)
    ls = cogs.local_search(inst, restarts=10, seed=1)
    assert bf["exact"] and hk["exact"] and not ls["exact"]
    assert hk["length"] == pytest.approx(bf["length"], rel=1e-9)
    assert ls["length"] >= hk["length"] - 1e-9
    assert sorted(bf["order"]) == list(range(9))


def test_tsplib_roundtrip():
    inst = cogs.sample_uniform(12, 5)
    text = cogs.write_tsplib(inst)
    parsed = cogs.parse_tsplib(text)
    assert parsed["dimension"] == 12
    assert parsed["edge_weight_type"] == "EUC_2D"


def test_stats():
    gaps = [i / 100.0 for i in range(1, 101)]
    assert cogs.worst_tail_mean(gaps, 1.0) == pytest.approx(1.0)
    assert cogs.worst_tail_mean(gaps, 10.0) == pytest.approx(0.955)
    assert cogs.pearson_correlation([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    res = cogs.welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert res["t"] == 0.0 and res["p"] == pytest.approx(1.0)
    weights = cogs.reweight([0.5, 0.5, 0.5], tau=0.5)
    assert weights == pytest.approx([1.0, 1.0, 1.0])


def test_policy_decode_and_logprob():
    policy = cogs.SolverPolicy.create(embed_dim=8, num_layers=1, num_heads=2, seed=1)
    instances = [cogs.sample_uniform(10, s) for s in range(4)]
    results = policy.greedy_decode(instances)
    assert len(results) == 4
    for inst, res in zip(instances, results):
        assert sorted(res["order"]) == list(range(10))
        assert res["length"] == pytest.approx(cogs.tour_length(inst, res["order"]))
        replay = policy.log_probability(inst, res["order"])
        assert replay == pytest.approx(res["log_probability"], abs=1e-6)
    assert policy.num_parameters > 0


def test_policy_save_load(tmp_path):
    policy = cogs.SolverPolicy.create(embed_dim=8, num_layers=1, num_heads=2, seed=2)
    path = str(tmp_path / "p.ckpt")
    policy.save(path)
    loaded = cogs.SolverPolicy.load(path)
    inst = cogs.sample_uniform(8, 9)
    assert loaded.greedy_decode([inst])[0]["order"] == policy.greedy_decode([inst])[0]["order"]


def test_vae_sample_bounds_and_training(tmp_path):
    vae = cogs.VaeModel.create(n=8, latent_dim=3, hidden_dim=12, seed=3)
    samples = vae.sample(16, seed=4)
    assert len(samples) == 16
    for s in samples:
        assert s.shape == (8, 2)
        assert s.min() >= 0.0 and s.max() <= 1.0
    mu = vae.encode_mean(samples[0])
    assert mu.shape == (3,)
    history = vae.train(epochs=2, batch_size=8, batches_per_epoch=2, seed=5)
    assert len(history) == 2
    assert all(math.isfinite(row["reconstruction"]) for row in history)
    path = str(tmp_path / "v.ckpt")
    vae.save(path)
    loaded = cogs.VaeModel.load(path)
    np.testing.assert_array_equal(loaded.sample(2, seed=9)[0], vae.sample(2, seed=9)[0])
