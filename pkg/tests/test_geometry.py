import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from altrec import (
    Aabb,
    PointCloud,
    TriangleMesh,
    bounding_cube,
    denormalize,
    normalize_to_unit,
    sample_mesh_uniform,
)
from altrec.errors import DegenerateExtent, LengthMismatch
from altrec.geometry import normalize_unit_vectors

from conftest import cube_mesh


def test_aabb_properties():
    box = Aabb(np.array([0.0, 1.0, 2.0]), np.array([2.0, 3.0, 6.0]))
    assert np.allclose(box.extent, [2.0, 2.0, 4.0])
    assert np.allclose(box.center, [1.0, 2.0, 4.0])
    assert box.diagonal == pytest.approx(np.sqrt(4 + 4 + 16))
    assert box.contains(np.array([[1.0, 2.0, 3.0]])).all()
    assert not box.contains(np.array([[3.0, 2.0, 3.0]])).any()


def test_pointcloud_validation():
    with pytest.raises(Exception):
        PointCloud(np.zeros((3, 2)))
    with pytest.raises(LengthMismatch):
        PointCloud(np.zeros((3, 3)), np.zeros((2, 3)))
    cloud = PointCloud(np.zeros((3, 3)))
    assert cloud.normals is None
    assert len(cloud) == 3


def test_normalize_round_trip(rng):
    pts = rng.uniform(-5, 3, size=(100, 3))
    cloud = PointCloud(pts)
    norm, scale, offset = normalize_to_unit(cloud)
    ext = norm.points.max(axis=0) - norm.points.min(axis=0)
    assert ext.max() == pytest.approx(1.0)
    assert norm.points.min() >= -1e-12
    back = denormalize(norm, scale, offset)
    np.testing.assert_allclose(back.points, pts, atol=1e-12)


def test_normalize_degenerate():
    with pytest.raises(DegenerateExtent):
        normalize_to_unit(PointCloud(np.zeros((5, 3))))


def test_bounding_cube_is_cube_and_contains(rng):
    cloud = PointCloud(rng.uniform(-2, 7, size=(50, 3)))
    box = bounding_cube(cloud, pad_fraction=0.1)
    assert np.allclose(box.extent, box.extent[0])
    assert box.contains(cloud.points).all()
    raw = cloud.points.max(axis=0) - cloud.points.min(axis=0)
    assert box.extent[0] == pytest.approx(1.1 * raw.max())


def test_normalize_unit_vectors(rng):
    v = rng.normal(size=(40, 3))
    u = normalize_unit_vectors(v)
    np.testing.assert_allclose(np.linalg.norm(u, axis=1), 1.0, atol=1e-12)


def test_mesh_face_quantities():
    mesh = cube_mesh()
    areas = mesh.face_areas()
    assert areas.shape == (12,)
    assert areas.sum() == pytest.approx(6.0)
    normals = mesh.face_normals()
    centroids = mesh.face_centroids()
    outward = np.sum(normals * (centroids - 0.5), axis=1)
    assert (outward > 0).all()


def test_mesh_rejects_bad_faces():
    verts = np.eye(3)
    with pytest.raises(Exception):
        TriangleMesh(verts, np.array([[0, 1, 3]]))  # out of range
    with pytest.raises(Exception):
        TriangleMesh(verts, np.array([[0, 1, 1]]))  # repeated index


def test_sample_mesh_uniform_deterministic_and_on_surface():
    mesh = cube_mesh()
    a = sample_mesh_uniform(mesh, 5000, seed=3)
    b = sample_mesh_uniform(mesh, 5000, seed=3)
    np.testing.assert_array_equal(a.points, b.points)
    # every sample sits on one of the six faces
    on_face = np.zeros(len(a), dtype=bool)
    for axis in range(3):
        for val in (0.0, 1.0):
            on_face |= np.abs(a.points[:, axis] - val) < 1e-12
    assert on_face.all()
    assert a.normals is not None
    np.testing.assert_allclose(np.linalg.norm(a.normals, axis=1), 1.0)


def test_sample_mesh_uniform_area_proportional():
    # two triangles with a 9:1 area ratio
    verts = np.array([
        [0.0, 0.0, 0.0], [3.0, 0.0, 0.0], [0.0, 3.0, 0.0],
        [10.0, 0.0, 0.0], [11.0, 0.0, 0.0], [10.0, 1.0, 0.0],
    ])
    faces = np.array([[0, 1, 2], [3, 4, 5]])
    mesh = TriangleMesh(verts, faces)
    pts = sample_mesh_uniform(mesh, 20000, seed=0).points
    frac_big = np.mean(pts[:, 0] < 5.0)
    assert frac_big == pytest.approx(0.9, abs=0.02)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_bounding_cube_pad_zero_tight(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1, 1, size=(10, 3))
    box = bounding_cube(PointCloud(pts), pad_fraction=0.0)
    raw = pts.max(axis=0) - pts.min(axis=0)
    assert box.extent[0] == pytest.approx(raw.max())
    assert np.allclose(box.center, 0.5 * (pts.max(axis=0) + pts.min(axis=0)))
