import math

import pytest

import driftwatch as dw


def test_cvm_statistic():
    assert dw.two_sample_statistic("cvm", [1, 2], [3, 4]) == pytest.approx(0.375)
    with pytest.raises(dw.InvalidArgument):
        dw.two_sample_statistic("ks", [1, 2], [3, 4])


def test_loss_values():
    assert dw.loss(53 * 20, "sudden_full") == pytest.approx(-125.0)
    assert dw.loss(None, "sudden_full") == -250.0
    assert dw.loss(1000, "sudden_full") == -1000.0


def test_schedule_and_stream():
    p = dw.schedule("gradual_to_half")
    assert len(p) == 100
    assert p[54] == 0.25
    z, drift, k = dw.synthesize_stream("sudden_full", batch_size=10, seed=3)
    assert len(z) == 1000 and k == 500
    assert not any(drift[:500]) and all(drift[500:])


def test_detect_end_to_end():
    table = dw.calibrate_thresholds(horizon=400, evaluation_stride=10, candidate_stride=10, num_streams=300, seed=1)
    h = [v for _, v in table.values]
    assert h == sorted(h)
    z, _, k = dw.synthesize_stream("sudden_full", batch_size=10, seed=4)
    d, k_hat, w = dw.detect(table, z[:400])
    assert d is None or d > 0
    tau, w_max = dw.scan_splits("cvm", z[:300], 10)
    assert 0 < tau < 300 and math.isfinite(w_max)


def test_hochberg_and_regions():
    assert dw.hochberg_adjust([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.04, 0.04])
    z0, _, _ = dw.synthesize_stream("sudden_full", batch_size=10, seed=5)
    regions = dw.significant_regions(z0[:400], z0[500:900])
    assert regions and all(lo <= hi for lo, hi, _, _ in regions)


def test_peeking_and_naive():
    pr, ev = dw.peeking_simulation(0.05, sims=500, seed=2)
    assert 0.1 < pr < 0.4 and ev > 0
    z, _, _ = dw.synthesize_stream("sudden_full", batch_size=10, seed=6)
    assert dw.naive_detect("pairwise", z, 10) is not None
