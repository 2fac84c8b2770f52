# Copyright 2026  pldanorm authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#  http://www.apache.org/licenses/LICENSE-2.0

"""Smoke tests for the python bindings.

These do not re-verify the numerics (the C++ suite owns that); they check
that the binding layer round-trips data, maps exceptions, and keeps the
python-visible behavior consistent with itself.
"""

import math

import numpy as np
import pytest

import pldanorm as pn


def _fitted_setup():
    truth = pn.make_truth_model(8, 3, 2, seed=11, f_scale=0.6, g_scale=0.4)
    data = pn.sample_dataset(truth, n_speakers=40, vpk_min=3, vpk_max=5, seed=5)
    result = pn.em_fit(data, f=3, g=2, iters=6, seed=1, rel_tol=0.0)
    return truth, data, result


def test_training_roundtrip():
    truth, data, result = _fitted_setup()
    assert truth.d == 8 and truth.F.shape == (8, 3) and truth.G.shape == (8, 2)
    assert data.X.shape[1] == 8
    assert data.num_speakers == 40
    assert len(data.ids) == data.num_vectors

    hist = result.log_likelihood_history
    assert result.iters_run == 6
    assert all(b - a >= -1e-8 for a, b in zip(hist, hist[1:]))
    assert math.isclose(hist[-1], pn.log_likelihood(result.params, data), rel_tol=1e-12)


def test_scoring_consistency():
    _, data, result = _fitted_setup()
    ops = pn.DerivedOperators(result.params)

    rng = np.random.default_rng(3)
    enrolls = [
        pn.Enrollment("s%d" % k, rng.standard_normal(8), L)
        for k, L in enumerate([1, 2, 3, 4])
    ]
    tests = [rng.standard_normal(8) for _ in range(5)]
    trials = [(m, t) for m in range(4) for t in range(5)]

    batch = pn.batch_score(ops, enrolls, tests, trials, num_threads=2)
    assert len(batch) == 20
    # The batch path evaluates the cached quadratic form, so it agrees with
    # the direct path to rounding, and with itself bit for bit.
    for (m, t), s in zip(trials, batch):
        assert math.isclose(s, pn.score_trial(ops, enrolls[m], tests[t]),
                            rel_tol=1e-10, abs_tol=1e-12)
    assert batch == pn.batch_score(ops, enrolls, tests, trials, num_threads=1)

    qf = pn.quadratic_form(ops, enrolls[2])
    assert qf.A.shape == (8, 8)
    got = pn.evaluate_quadratic_form(qf, tests[0])
    assert abs(got - pn.score_trial(ops, enrolls[2], tests[0])) < 1e-10


def test_calibration_pipeline():
    _, data, result = _fitted_setup()
    ops = pn.DerivedOperators(result.params)

    # Enroll the first three vectors of a sampled speaker, centered on the
    # fitted mean, so the stats describe a plausible enrollment.
    rows = [i for i, s in enumerate(data.speakers) if s == data.speakers[0]]
    i_sum = (data.X[rows[:3]] - result.params.m).sum(axis=0)
    enroll = pn.Enrollment(data.speakers[0], i_sum, 3)

    stats = pn.speaker_stats(ops, enroll)
    assert stats.var1 >= 0.0 and stats.var2 > 0.0
    assert stats.L == 3

    cal = pn.calibrate_speaker(stats, beta=1.0)
    assert math.isfinite(cal.threshold) and cal.scale > 0.0
    assert pn.normalize_score(cal.threshold, cal) == 0.0
    for dt in (-0.05, 0.05):
        assert pn.analytic_dcf(cal.threshold, stats, beta=1.0) <= pn.analytic_dcf(
            cal.threshold + dt, stats, beta=1.0
        )

    # This toy model's impostor scores spread far wider than its target
    # scores; at beta=100 rejecting everything beats every interior
    # threshold and the closed form refuses to pick one.
    with pytest.raises(RuntimeError, match="no interior minimum"):
        pn.calibrate_speaker(stats, beta=100.0)

    cond = pn.conditional_test_distribution(ops, enroll)
    assert cond.mu_hat.shape == (8,)
    assert np.allclose(cond.R_hat, cond.R_hat.T)


def test_empirical_min_dcf_frozen():
    dcf, threshold = pn.empirical_min_dcf([2.0, 3.0], [0.0, 1.0], beta=100.0)
    assert dcf == 0.0
    assert threshold == 1.5
    dcf, threshold = pn.empirical_min_dcf([0.0, 1.0], [0.5], beta=2.0)
    assert dcf == 0.5 and threshold == 0.75
    with pytest.raises(ValueError, match="non-target"):
        pn.empirical_min_dcf([1.0], [], beta=1.0)


def test_preprocessing():
    rng = np.random.default_rng(9)
    data = rng.standard_normal((500, 4)) * 2.0 + 1.0
    wt = pn.fit_whitening(data)
    white = pn.apply_whitening(wt, data)
    assert np.abs(white.mean(axis=0)).max() < 1e-10
    cov = white.T @ white / (white.shape[0] - 1)
    assert np.abs(cov - np.eye(4)).max() < 1e-8

    v = pn.length_normalize(np.array([3.0, 4.0]))
    assert np.allclose(v, [0.6, 0.8])


def test_exception_mapping():
    bad = pn.PldaParameters()
    bad.d, bad.f, bad.g = 4, 2, 1
    bad.m = np.zeros(4)
    bad.F = np.zeros((3, 2))  # wrong row count
    bad.G = np.zeros((4, 1))
    bad.Sigma = np.ones(4)
    with pytest.raises(ValueError, match="F has wrong shape"):
        bad.validate()

    stats = pn.SpeakerScoreStats()
    stats.L = 1
    stats.mu1, stats.var1 = 0.0, 1.0
    stats.mu2, stats.var2 = 0.0, 1.0
    with pytest.raises(RuntimeError, match="indistinguishable"):
        pn.optimal_threshold(stats, beta=1.0)


def test_experiment_harness():
    cfg = pn.ExperimentConfig()
    cfg.seed = 21
    cfg.dim = 10
    cfg.truth_f = 4
    cfg.truth_g = 2
    cfg.n_train_speakers = 50
    cfg.train_vpk_min = cfg.train_vpk_max = 4
    cfg.n_eval_speakers = 25
    cfg.eval_vpk_min = cfg.eval_vpk_max = 7
    cfg.f = 4
    cfg.g = 2
    cfg.em_iters = 3
    cfg.uniform_L = [1, 3]
    cfg.include_mixed = True
    cfg.write_scores = False

    report = pn.run_experiment(cfg)
    assert report.seed == 21
    assert report.n_train_vectors == 200
    names = [c.name for c in report.conditions]
    assert names == ["L1", "L3", "mixed"]
    for cond in report.conditions:
        assert cond.n_trials == 25 * 50
        assert cond.n_targets == 50
        assert 0.0 <= cond.norm_min_dcf <= cfg.beta

    table = pn.compare_table(report)
    assert "raw" in table.text and "normalized" in table.text
    assert table.csv.splitlines()[0] == "method,L1,L3,mixed"

    hist = pn.threshold_histogram(report, "mixed", bins=10)
    assert len(hist.edges) == 11
    assert sum(hist.counts) == len(report.conditions[2].speakers)
