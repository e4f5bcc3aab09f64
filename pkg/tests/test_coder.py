import numpy as np
import pytest

from condmotion.activity import BlockGrid, Thresholds, classify, difference_image
from condmotion.coder import (
    EmpiricalPoint,
    QuantizerSpec,
    bound_violations,
    entropy_rate,
    measure,
    quantize,
    quantize_samples,
)
from condmotion.estimator import ConditionalMotionRD
from condmotion.frames import SyntheticSpec, synthesize
from condmotion.motion import MotionField, ResidualSet, estimate_motion
from condmotion.stats import InsufficientDataError, ModelParams


def test_quantizer_examples():
    idx, rec = quantize_samples([0.0, 7.6, -7.6, 2.4], 5)
    assert idx.tolist() == [0, 2, -2, 0]
    assert rec.tolist() == [0, 10, -10, 0]


def test_quantizer_error_bound(rng):
    x = rng.normal(0, 30, 10000)
    for step in (0.3, 1, 7.5):
        _, rec = quantize_samples(x, step)
        assert np.max(np.abs(rec - x)) <= step / 2 + 1e-12


def test_quantize_both_streams():
    res = ResidualSet(np.full((1, 2, 2), 7.6), np.full((2, 2, 2), -1.0))
    idx, rec = quantize(res, QuantizerSpec(5))
    assert np.all(idx["dfd"] == 2) and np.all(rec["fd"] == 0)


def test_quantizer_spec_validation():
    with pytest.raises(ValueError):
        QuantizerSpec(0)


def test_entropy_examples():
    assert entropy_rate([3, 3, 3]) == 0
    assert entropy_rate([0, 1] * 50) == 1.0
    assert entropy_rate(list("aaaabbcc")) == 1.5
    with pytest.raises(InsufficientDataError):
        entropy_rate([])


def _pair(spec, w=128, h=96):
    seq = synthesize(spec, w, h, 2)
    a, b = seq[0], seq[1]
    grid = BlockGrid.for_frame(w, h, 16)
    amap = classify(difference_image(a, b), grid, Thresholds())
    return a, b, amap, estimate_motion(a, b, amap, 7)


def test_identical_frames_zero_rate_and_distortion(rng):
    a = rng.uniform(0, 255, (64, 64))
    grid = BlockGrid.for_frame(64, 64, 16)
    amap = classify(difference_image(a, a), grid, Thresholds())
    for step in (0.5, 4, 40):
        pt = measure(a, a, amap, MotionField.zero(grid, 7), QuantizerSpec(step))
        assert pt.distortion == 0 and pt.rate_residual == 0 and pt.rate_mv == 0


def test_step_ordering_and_accounting():
    a, b, amap, field = _pair(SyntheticSpec("moving-rect", rho=0.8, sigma2=25, motion=(2, 1), seed=5))
    fine = measure(a, b, amap, field, QuantizerSpec(0.5))
    coarse = measure(a, b, amap, field, QuantizerSpec(8))
    assert fine.distortion < coarse.distortion
    assert fine.rate_residual > coarse.rate_residual
    for pt in (fine, coarse):
        assert pt.rate_total == pt.rate_mv + pt.rate_residual
        assert pt.rate_mv == pytest.approx(amap.lambda_m * field.b_m / 256)


def test_distortion_is_quantization_error():
    a, b, amap, field = _pair(SyntheticSpec("white-noise", sigma2=100, seed=1))
    for step in (1.0, 3.0):
        pt = measure(a, b, amap, field, QuantizerSpec(step))
        assert pt.distortion <= step**2 / 4
        # fine uniform quantization of a smooth density: MSE close to step^2 / 12
        assert pt.distortion == pytest.approx(step**2 / 12, rel=0.1)


def test_sweep_monotone():
    a, b, amap, field = _pair(SyntheticSpec("moving-rect", rho=0.5, sigma2=40, motion=(3, 2), seed=2))
    steps = [16, 12, 8, 6, 4, 3, 2, 1, 0.5]
    pts = [measure(a, b, amap, field, QuantizerSpec(s)) for s in steps]
    d = [p.distortion for p in pts]
    r = [p.rate_residual for p in pts]
    assert all(x >= y for x, y in zip(d, d[1:]))
    assert all(x <= y for x, y in zip(r, r[1:]))


def test_points_above_theory_on_ar1_source():
    seq = synthesize(SyntheticSpec("ar1-field", rho=0.9, sigma2=25, seed=8), 320, 320, 2)
    est = ConditionalMotionRD(t_g=1e9).fit(seq)
    pts = est.measure([0.5, 1, 2, 4, 8])
    assert est.analysis_.residuals.fd_samples.size >= 10**5
    assert bound_violations(pts, est.params_, 0.05) == []


def test_bound_violation_detected():
    p = ModelParams(100, 100, 0.0, 0.5)
    low = EmpiricalPoint(0.1, 0.0, 0.1, 1.0)
    zero = EmpiricalPoint(0.0, 0.0, 0.0, 0.0)
    bad = bound_violations([low, zero], p, 0.05)
    assert len(bad) == 1 and bad[0][0] is low
    assert bad[0][1] == pytest.approx(0.5 * np.log2(100))
