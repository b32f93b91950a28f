import numpy as np
import pytest

from altrec import MeshIndex, PointCloud, lambda_project, uniform_lambda
from altrec.errors import EmptyInput, LengthMismatch, OutOfRange

from conftest import cube_mesh


def test_uniform_lambda_validation():
    with pytest.raises(OutOfRange):
        uniform_lambda(5, 1.5)
    with pytest.raises(OutOfRange):
        uniform_lambda(5, -0.1)
    with pytest.raises(EmptyInput):
        uniform_lambda(0, 0.5)
    np.testing.assert_array_equal(uniform_lambda(3, 0.5), [0.5, 0.5, 0.5])


def test_full_projection_lands_on_surface():
    mesh = cube_mesh()
    cloud = PointCloud(np.array([[0.5, 0.5, 1.4], [0.5, 0.5, 0.8]]))
    result = lambda_project(cloud, mesh, uniform_lambda(2, 1.0))
    np.testing.assert_allclose(result.cloud.points[0], [0.5, 0.5, 1.0],
                               atol=1e-12)
    np.testing.assert_allclose(result.cloud.points[1], [0.5, 0.5, 1.0],
                               atol=1e-12)
    np.testing.assert_allclose(result.displacements, [0.4, 0.2], atol=1e-12)


def test_zero_lambda_is_identity():
    mesh = cube_mesh()
    pts = np.array([[0.3, 0.3, 1.7], [2.0, 2.0, 2.0]])
    result = lambda_project(PointCloud(pts), mesh, uniform_lambda(2, 0.0))
    np.testing.assert_array_equal(result.cloud.points, pts)
    np.testing.assert_array_equal(result.displacements, [0.0, 0.0])


def test_partial_lambda_interpolates():
    mesh = cube_mesh()
    cloud = PointCloud(np.array([[0.5, 0.5, 2.0]]))
    result = lambda_project(cloud, mesh, np.array([0.25]))
    np.testing.assert_allclose(result.cloud.points[0], [0.5, 0.5, 1.75],
                               atol=1e-12)
    assert result.mean_displacement == pytest.approx(0.25)


def test_per_point_weights_apply_individually():
    mesh = cube_mesh()
    pts = np.tile([0.5, 0.5, 2.0], (3, 1))
    result = lambda_project(PointCloud(pts), mesh, np.array([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(result.cloud.points[:, 2], [2.0, 1.5, 1.0],
                               atol=1e-12)


def test_normals_preserved():
    mesh = cube_mesh()
    normals = np.tile([0.0, 0.0, 1.0], (2, 1))
    cloud = PointCloud(np.array([[0.5, 0.5, 1.5], [0.4, 0.4, 1.5]]), normals)
    result = lambda_project(cloud, mesh, uniform_lambda(2, 1.0))
    np.testing.assert_array_equal(result.cloud.normals, normals)


def test_weight_validation():
    mesh = cube_mesh()
    cloud = PointCloud(np.array([[0.5, 0.5, 2.0]]))
    with pytest.raises(LengthMismatch):
        lambda_project(cloud, mesh, np.array([0.5, 0.5]))
    with pytest.raises(OutOfRange):
        lambda_project(cloud, mesh, np.array([1.5]))


def test_accepts_prebuilt_index():
    mesh = cube_mesh()
    index = MeshIndex(mesh)
    cloud = PointCloud(np.array([[0.5, 0.5, 2.0]]))
    a = lambda_project(cloud, mesh, uniform_lambda(1, 1.0))
    b = lambda_project(cloud, index, uniform_lambda(1, 1.0))
    np.testing.assert_array_equal(a.cloud.points, b.cloud.points)
