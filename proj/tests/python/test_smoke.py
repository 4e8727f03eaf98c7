"""End-to-end smoke tests for the python bindings."""

import json

import numpy as np
import pytest

import genformer as gf


def test_special_functions():
    assert gf.gaussian_cdf(0.0) == 0.5
    assert abs(gf.gaussian_quantile(0.96) - 1.75) < 1e-2
    p = np.array([0.1, 0.5, 0.9])
    x = gf.gaussian_quantile(p)
    assert np.allclose(gf.gaussian_cdf(x), p, atol=1e-12)
    assert abs(gf.gamma_cdf(1.0, 1.0, 1.0) - (1.0 - np.exp(-1.0))) < 1e-12


def test_reshuffle_golden_table():
    series = np.array([[2.14, 6.36, 0.64, 4.05, 1.31],
                       [0.51, 3.24, 2.46, 0.60, 2.00]])
    fresh = [[4.68, 4.34, 2.58, 1.76, 1.26],
             [5.53, 5.27, 4.34, 2.75, 1.52]]
    out = gf.reshuffle_with_samples(series, fresh)
    assert out[0].tolist() == [2.58, 4.68, 1.26, 4.34, 1.76]
    assert out[1].tolist() == [1.52, 5.53, 5.27, 2.75, 4.34]


def test_correlation_correction_is_exact():
    rng = np.random.default_rng(7)
    series = rng.standard_normal((3, 20000))
    target = np.array([[1.0, 0.5, 0.5],
                       [0.5, 1.0, 0.5],
                       [0.5, 0.5, 1.0]])
    corrected = gf.correlation_correct(series, target)
    achieved = gf.spatial_correlation(corrected)
    assert gf.frobenius_rel_error(target, achieved) < 1e-8

    shuffled = gf.reshuffle_gaussian(corrected, seed=3)
    assert gf.frobenius_rel_error(target, gf.spatial_correlation(shuffled)) < 0.1
    # marginals are exact: sorted values are fresh N(0,1) draws
    assert abs(np.mean(shuffled)) < 0.02


def test_sde_moments():
    q = gf.sde_simulate(theta=40.0, alpha=1.0, beta=1.0, dt=1e-3, m=3,
                        n_steps=200, n_realizations=200, seed=11)
    assert q.shape == (200, 4, 200)
    assert abs(q.mean() - 1.0) < 0.05
    v = gf.build_v(q[0])
    assert v.shape == (3, 200)
    assert np.allclose(v, q[0, 0] + q[0, 1:])


def test_kmeans_and_states():
    rng = np.random.default_rng(5)
    points = np.concatenate([rng.normal(0, 0.2, (50, 2)), rng.normal(5, 0.2, (50, 2))])
    centroids, assignment, inertia = gf.kmeans(points, k=2, n_restarts=4, seed=1)
    assert centroids.shape == (2, 2)
    assert len(set(assignment.tolist())) == 2
    assert inertia < 20.0

    series = rng.standard_normal((2, 500))
    c, n_tail, threshold = gf.fit_state_space(series, level=0.96, n_tail=2, n_bulk=6,
                                              n_restarts=2, seed=3)
    assert abs(threshold - 1.75) < 1e-2
    labels = gf.assign_states(series, c, n_tail)
    assert labels.shape == (500,)
    assert labels.max() < len(c)


def test_markov_chain_roundtrip():
    probs = gf.estimate_transition_matrix([[0, 1, 0, 1, 0]], n_states=2)
    assert probs[0, 1] == 1.0
    assert probs[1, 0] == 1.0
    chain = gf.simulate_chain(probs, init_state=0, n_steps=10, seed=4)
    assert chain.tolist() == [1, 0, 1, 0, 1, 0, 1, 0, 1, 0]


def test_dryrun_pipeline(tmp_path):
    config = json.loads(gf.default_config("sde", "dryrun"))
    report = json.loads(gf.run_pipeline(json.dumps(config), str(tmp_path / "out")))
    assert report["experiment"] == "sde"
    assert report["spatial_correlation"]["rel_error_cholesky"] < 1e-8
    assert (tmp_path / "out" / "report.json").exists()
    assert (tmp_path / "out" / "figures" / "exceedance.csv").exists()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
