"""Smoke tests for the python module: thin checks that the bindings round
numpy data through the C++ core correctly."""

import json
import math

import numpy as np
import pytest

import hvsisp


def make_frame(value=200, size=16, bit_depth=10):
    data = np.full((size, size), value, dtype=np.uint16)
    return hvsisp.QuadBayerFrame(data, bit_depth=bit_depth, phase=3)


def test_frame_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    data = rng.integers(0, 1024, size=(8, 12), dtype=np.uint16)
    frame = hvsisp.QuadBayerFrame(data, bit_depth=10, phase=2)
    path = str(tmp_path / "f.pgm")
    hvsisp.write_raw(frame, path)
    back = hvsisp.read_raw(path)
    assert back.width == 12 and back.height == 8
    assert back.bit_depth == 10 and back.phase == 2
    np.testing.assert_array_equal(back.data, data)


def test_invalid_frame_raises():
    with pytest.raises(hvsisp.HvsispError):
        hvsisp.QuadBayerFrame(np.zeros((3, 4), dtype=np.uint16))


def test_demosaic_constant():
    frame = hvsisp.fill_event_holes(make_frame(value=511))
    assert frame.holes_filled
    img = hvsisp.demosaic(frame)
    assert img.shape == (16, 16, 3)
    np.testing.assert_allclose(img, 511.0 / 1023.0, atol=1e-6)


def test_ciede2000_reference_pair():
    d = hvsisp.ciede2000((50.0, 2.6772, -79.7751), (50.0, 0.0, -82.7485))
    assert abs(d - 2.0425) < 1e-4
    assert hvsisp.delta_e_ab((50, 0, 0), (53, 4, 0)) == pytest.approx(5.0)


def test_srgb_curve_vectorized():
    x = np.linspace(0.0, 1.0, 101)
    y = hvsisp.srgb_encode(x)
    back = hvsisp.srgb_decode(y)
    np.testing.assert_allclose(back, x, atol=1e-9)


def test_fit_ccm_identity():
    ref = np.clip(np.abs(np.sin(np.arange(72).reshape(24, 3))) * 0.8 + 0.05, 0, 1)
    matrix, report = hvsisp.fit_ccm(ref, ref)
    np.testing.assert_allclose(matrix, np.eye(3), atol=1e-3)
    assert report["final_objective"] <= report["initial_objective"] + 1e-12


def test_run_isp_constant():
    config = "\n".join(
        [
            "wb.mode=fixed",
            "wb.gains=1.0,1.0,1.0",
            "highlight.enabled=false",
            "denoise.method=none",
            "ccm.mode=identity",
            "gamma.enabled=true",
        ]
    )
    image, report_json = hvsisp.run_isp(make_frame(value=200), config)
    expected = hvsisp.srgb_encode(200.0 / 1023.0)
    np.testing.assert_allclose(image, expected, atol=1e-6)
    report = json.loads(report_json)
    assert [s["name"] for s in report["stages"]] == [
        "hole_fill",
        "demosaic",
        "white_balance",
        "gamma",
    ]


def test_events_simulate_and_voxelize():
    log0 = np.zeros((4, 6), dtype=np.float32)
    log1 = np.zeros((4, 6), dtype=np.float32)
    log1[2, 3] = 0.55  # 2.75 theta at 0.2
    stream = hvsisp.simulate_events(log0, log1, 0.2, 0, 1000)
    assert len(stream) == 2
    records = stream.records
    assert (records[:, 3] == 1).all()
    assert (records[:, 1] == 3).all() and (records[:, 2] == 2).all()

    grid = hvsisp.voxelize(stream, 0, 1001, 4)
    assert grid.shape == (4, 4, 6)
    assert grid.sum() == pytest.approx(2.0, abs=1e-6)

    activity = hvsisp.activity_map(stream, 0, 1001)
    assert activity[2, 3] == pytest.approx(2.0)
    assert activity.sum() == pytest.approx(2.0)


def test_event_stream_roundtrip(tmp_path):
    records = np.array(
        [[5, 3, 7, -1], [9, 1, 2, 1]], dtype=np.int64
    )
    stream = hvsisp.EventStream(records, width=8, height=8)
    path = str(tmp_path / "s.evt1")
    hvsisp.write_events(stream, path)
    back = hvsisp.read_events(path)
    np.testing.assert_array_equal(back.records, records)


def test_metrics_and_png(tmp_path):
    rng = np.random.default_rng(3)
    img = rng.random((16, 16, 3)).astype(np.float32)
    assert math.isinf(hvsisp.psnr(img, img))
    assert hvsisp.ssim(img, img) == 1.0
    assert hvsisp.l1(img, img) == 0.0

    path = str(tmp_path / "x.png")
    hvsisp.write_png(img, path)
    back = hvsisp.read_png(path)
    assert np.abs(back - img).max() <= 1.0 / 510.0 + 1e-6


def test_sensor_formulas():
    assert hvsisp.dynamic_range_db(1e6, 1.0) == pytest.approx(120.0)
    assert hvsisp.temporal_resolution_hz(1.25e-3) == pytest.approx(800.0)
