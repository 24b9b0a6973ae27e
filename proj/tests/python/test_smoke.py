import numpy as np
import pytest

import gave


def test_identity_kernel_conv():
    x = np.random.default_rng(0).random((5, 5, 1), dtype=np.float32)
    k = np.zeros((1, 1, 3, 3), np.float32)
    k[0, 0, 1, 1] = 1
    np.testing.assert_array_equal(gave.conv2d(x, k, np.zeros(1, np.float32)), x)


def test_conv_shape_error_is_raised_as_module_error():
    x = np.zeros((5, 5, 2), np.float32)
    with pytest.raises(gave.Error, match="channel"):
        gave.conv2d(x, np.zeros((1, 3, 3, 3), np.float32), np.zeros(1, np.float32))


def test_sigmoid_bounds():
    y = gave.sigmoid(np.array([-1e30, 0.0, 1e30], np.float32))
    assert y[1] == 0.5
    assert np.all((y > 0) & (y < 1))


def test_slice_constant_grid():
    grid = np.full((2, 3, 12), 0.25, np.float32)
    guide = np.random.default_rng(1).random((16, 24, 1), dtype=np.float32)
    out = gave.slice(grid, 3, guide)
    assert out.shape == (16, 24, 4)
    np.testing.assert_array_equal(out, 0.25)


def test_fill_holes_constant_depth():
    rgb = np.full((16, 16, 3), 0.5, np.float32)
    depth = np.full((16, 16), 2.0, np.float32)
    depth[6:9, 6:9] = 0
    out = gave.fill_holes(rgb, depth, (50.0, 50.0, 7.5, 7.5))
    np.testing.assert_allclose(out, 2.0, rtol=1e-6)


def test_procrustes_and_gradient():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(20, 3))
    theta = 0.3
    r = np.array([[np.cos(theta), -np.sin(theta), 0], [np.sin(theta), np.cos(theta), 0], [0, 0, 1]])
    y = x @ r.T + np.array([0.1, -0.2, 0.3])
    w = rng.uniform(0.5, 1.0, 20).tolist()
    pose = gave.weighted_procrustes(x, y, w)
    np.testing.assert_allclose(pose[:3, :3], r, atol=1e-10)
    assert gave.rotation_error(pose[:3, :3], r) < 1e-6
    _, dx, dy, dw = gave.procrustes_grad(x, y, w)
    assert dx.shape == (12, 60) and dy.shape == (12, 60) and dw.shape == (12, 20)


def test_metrics():
    assert gave.translation_error([0.1, 0, 0], [0, 0, 0]) == pytest.approx(100.0)
    assert gave.chamfer_distance(np.zeros((1, 3)), np.array([[0.01, 0, 0]])) == pytest.approx(1.0)


def test_synthetic_registration_and_features():
    pair = gave.gen_scene(1, "width=64,height=48,focal=56")
    ref, tgt = pair["ref"], pair["tgt"]
    assert ref["rgb"].shape == (48, 64, 3) and ref["depth"].shape == (48, 64)
    pose = gave.register_oracle(ref, tgt, pair["gt"], {"k": "200"})
    assert gave.rotation_error(pose[:3, :3], pair["gt"][:3, :3]) < 0.5
    feats = gave.extract_features(ref["rgb"], ref["depth"], ref["intrinsics"], seed=3,
                                  config={"d_c": "16", "n_group": "4"})
    assert feats.shape == (48, 64, 16)
    assert np.isfinite(feats).all()
