import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altrec import (
    PointCloud,
    chamfer_l1,
    evaluate,
    f_score,
    mads,
    normal_consistency,
    rmsd,
)
from altrec.errors import MissingNormals, OutOfRange


def brute_nn_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exhaustive nearest-neighbour distances from each a-point to b."""
    out = np.empty(len(a))
    for i, p in enumerate(a):
        out[i] = np.min(np.linalg.norm(b - p, axis=1))
    return out


def test_identical_sets_zero():
    pts = np.random.default_rng(0).uniform(size=(50, 3))
    assert rmsd(pts, pts) == 0.0
    assert mads(pts, pts) == 0.0
    assert chamfer_l1(pts, pts) == 0.0
    assert f_score(pts, pts) == 1.0


def test_two_point_hand_check():
    p = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    gt = np.array([[0.0, 0.0, 0.0]])
    assert mads(p, gt) == pytest.approx(0.5, abs=1e-15)
    assert rmsd(p, gt) == pytest.approx(np.sqrt(0.5), abs=1e-15)


def test_rmsd_directional():
    a = np.array([[0.0, 0.0, 0.0]])
    b = np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]])
    assert rmsd(a, b) == 0.0
    assert rmsd(b, a) == pytest.approx(np.sqrt(50.0))


def test_chamfer_symmetric(rng):
    a = rng.uniform(size=(40, 3))
    b = rng.uniform(size=(60, 3))
    assert chamfer_l1(a, b) == pytest.approx(chamfer_l1(b, a), abs=1e-15)


def test_f_score_thresholds():
    p = np.array([[0.0, 0.0, 0.0]])
    near = np.array([[0.0, 0.0, 0.004]])
    far = np.array([[0.0, 0.0, 0.01]])
    assert f_score(p, near, tau=5e-3) == 1.0
    assert f_score(p, far, tau=5e-3) == 0.0
    with pytest.raises(OutOfRange):
        f_score(p, near, tau=0.0)


def test_normal_consistency_cases(rng):
    pts = rng.uniform(size=(30, 3))
    n = rng.normal(size=(30, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    cloud = PointCloud(pts, n)
    assert normal_consistency(cloud, cloud) == pytest.approx(1.0, abs=1e-12)
    flipped = PointCloud(pts, -n)
    assert normal_consistency(flipped, cloud) == pytest.approx(1.0, abs=1e-12)
    # orthogonal pairs at matched positions
    e1 = np.tile([1.0, 0.0, 0.0], (30, 1))
    e2 = np.tile([0.0, 1.0, 0.0], (30, 1))
    assert normal_consistency(
        PointCloud(pts, e1), PointCloud(pts, e2)
    ) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(MissingNormals):
        normal_consistency(PointCloud(pts), cloud)


def test_scaling_covariance(rng):
    a = rng.uniform(size=(25, 3))
    b = rng.uniform(size=(35, 3))
    s = 3.7
    assert rmsd(s * a, s * b) == pytest.approx(s * rmsd(a, b), rel=1e-12)
    assert mads(s * a, s * b) == pytest.approx(s * mads(a, b), rel=1e-12)
    assert chamfer_l1(s * a, s * b) == pytest.approx(
        s * chamfer_l1(a, b), rel=1e-12)
    assert f_score(s * a, s * b, tau=s * 5e-3) == pytest.approx(
        f_score(a, b, tau=5e-3), abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_metrics_match_exhaustive_oracle(seed):
    rng = np.random.default_rng(seed)
    n_a = int(rng.integers(1, 300))
    n_b = int(rng.integers(1, 300))
    a = rng.uniform(-1, 1, size=(n_a, 3))
    b = rng.uniform(-1, 1, size=(n_b, 3))
    d_ab = brute_nn_dists(a, b)
    d_ba = brute_nn_dists(b, a)
    tau = 0.3
    assert rmsd(a, b) == pytest.approx(np.sqrt(np.mean(d_ab**2)), rel=1e-12)
    assert mads(a, b) == pytest.approx(np.mean(d_ab), rel=1e-12)
    assert chamfer_l1(a, b) == pytest.approx(
        0.5 * (np.mean(d_ab) + np.mean(d_ba)), rel=1e-12)
    prec = np.mean(d_ab <= tau)
    rec = np.mean(d_ba <= tau)
    expect_f = 0.0 if prec + rec == 0 else 2 * prec * rec / (prec + rec)
    assert f_score(a, b, tau=tau) == pytest.approx(expect_f, abs=1e-15)
    assert mads(a, b) <= rmsd(a, b) + 1e-15


def test_evaluate_bundle(rng):
    a = PointCloud(rng.uniform(size=(40, 3)))
    b = PointCloud(rng.uniform(size=(50, 3)))
    out = evaluate(a, b, tau=0.1)
    assert out["n_pred"] == 40
    assert out["n_gt"] == 50
    assert out["tau"] == 0.1
    assert np.isnan(out["nc"])  # no normals supplied
    assert out["rmsd"] >= out["mads"]
