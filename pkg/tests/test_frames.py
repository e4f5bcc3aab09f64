import numpy as np
import pytest

from condmotion.frames import (
    MalformedInputError,
    SyntheticSpec,
    lag1_scan_correlation,
    read_raw_yuv420,
    rect_origin,
    synthesize,
    write_raw_yuv420,
)


def test_read_constant_two_frames(tmp_path):
    path = tmp_path / "c.yuv"
    frame = np.concatenate([np.full(256, 128), np.full(128, 7)]).astype(np.uint8)
    path.write_bytes(np.tile(frame, 2).tobytes())
    assert path.stat().st_size == 768
    seq = read_raw_yuv420(path, 16, 16)
    assert len(seq) == 2
    assert seq.frames.shape == (2, 16, 16)
    assert np.all(seq.frames == 128)


def test_read_rejects_truncated_file(tmp_path):
    path = tmp_path / "bad.yuv"
    path.write_bytes(bytes(767))
    with pytest.raises(MalformedInputError, match="767"):
        read_raw_yuv420(path, 16, 16)


def test_read_frame_count_from_byte_count(tmp_path):
    # 8x8 4:2:0: 64 luma + 2 * 16 chroma = 96 bytes per frame
    path = tmp_path / "four.yuv"
    data = np.arange(384, dtype=np.uint8)
    path.write_bytes(data.tobytes())
    seq = read_raw_yuv420(path, 8, 8)
    assert len(seq) == 4
    for k in range(4):
        np.testing.assert_array_equal(seq[k].ravel(), data[96 * k : 96 * k + 64])


def test_read_rejects_odd_dimensions(tmp_path):
    path = tmp_path / "x.yuv"
    path.write_bytes(bytes(100))
    with pytest.raises(MalformedInputError):
        read_raw_yuv420(path, 9, 8)


def test_read_missing_file(tmp_path):
    with pytest.raises(OSError):
        read_raw_yuv420(tmp_path / "none.yuv", 8, 8)


def test_constant_spec():
    seq = synthesize(SyntheticSpec("constant", mean=42.0), 24, 16, 3)
    assert np.all(seq.frames == 42.0)
    assert seq.frames.var() == 0


def test_ar1_scan_correlation_and_variance():
    f = synthesize(SyntheticSpec("ar1-field", rho=0.9, sigma2=25, seed=3), 512, 512, 1)[0]
    assert abs(lag1_scan_correlation(f) - 0.9) < 0.02
    assert abs(f.var() - 25) < 0.05 * 25


def test_ar1_rho_zero_is_uncorrelated():
    f = synthesize(SyntheticSpec("ar1-field", rho=0.0, sigma2=9, seed=4), 512, 512, 1)[0]
    assert abs(lag1_scan_correlation(f)) < 0.02


def test_moving_rect_origin_shifts_by_motion():
    spec = SyntheticSpec("moving-rect", sigma2=0, mean=50, contrast=100, motion=(3, 2))
    seq = synthesize(spec, 64, 48, 2)
    ys, xs = np.nonzero(seq[0] > 100)
    ys2, xs2 = np.nonzero(seq[1] > 100)
    assert (xs2.min(), ys2.min()) == (xs.min() + 3, ys.min() + 2)
    assert rect_origin(spec, 64, 48, 1) == (xs2.min(), ys2.min())


def test_same_seed_same_bytes(tmp_path):
    spec = SyntheticSpec("white-noise", sigma2=16, seed=9)
    a, b = tmp_path / "a.yuv", tmp_path / "b.yuv"
    write_raw_yuv420(a, synthesize(spec, 32, 16, 3))
    write_raw_yuv420(b, synthesize(spec, 32, 16, 3))
    assert a.read_bytes() == b.read_bytes()


def test_roundtrip_after_clamping(tmp_path):
    spec = SyntheticSpec("ar1-field", rho=0.5, sigma2=2500, mean=128, seed=1)
    seq = synthesize(spec, 32, 16, 2)
    path = tmp_path / "r.yuv"
    write_raw_yuv420(path, seq)
    back = read_raw_yuv420(path, 32, 16)
    np.testing.assert_array_equal(back.frames, np.clip(np.rint(seq.frames), 0, 255))
    path2 = tmp_path / "r2.yuv"
    write_raw_yuv420(path2, back)
    assert path2.read_bytes() == path.read_bytes()


@pytest.mark.parametrize("bad", [dict(rho=1.0), dict(rho=-0.1), dict(sigma2=-1), dict(kind="plasma")])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        SyntheticSpec(**bad)


def test_spec_from_dict_rejects_unknown_fields():
    with pytest.raises(ValueError, match="unknown"):
        SyntheticSpec.from_dict({"kind": "constant", "colour": 3})
    spec = SyntheticSpec.from_dict({"kind": "moving-rect", "motion": [1, -1]})
    assert spec.motion == (1, -1)
    assert SyntheticSpec.from_dict(spec.to_dict()) == spec
