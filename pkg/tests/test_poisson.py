import numpy as np
import pytest

from altrec import PoissonParams, bounding_cube, reconstruct
from altrec.errors import OutOfRange, PointOutsideDomain
from altrec.geometry import Aabb, PointCloud
from altrec.meshquery import MeshIndex
from altrec.poisson import (
    ScalarGrid,
    _divergence,
    _laplacian_apply,
    _ScreenedOperator,
    _trilinear_stamp,
    extract_isosurface,
    interpolate_grid,
    smooth_grid_values,
    solve_screened_poisson,
    splat_vector_field,
)

from conftest import sphere_cloud


UNIT = Aabb(np.zeros(3), np.ones(3))


def test_params_validation():
    with pytest.raises(OutOfRange):
        PoissonParams(depth=0)
    with pytest.raises(OutOfRange):
        PoissonParams(depth=11)
    with pytest.raises(OutOfRange):
        PoissonParams(depth=6, cg_tolerance=0.0)


def test_trilinear_stamp_partition_of_unity(rng):
    pts = rng.uniform(0.05, 0.95, size=(40, 3))
    stamp = _trilinear_stamp(pts, UNIT, depth=4)
    row_sums = np.asarray(stamp.sum(axis=1)).ravel()
    np.testing.assert_allclose(row_sums, 1.0, atol=1e-12)


def test_trilinear_stamp_rejects_outside():
    pts = np.array([[0.5, 0.5, 1.5]])
    with pytest.raises(PointOutsideDomain) as err:
        _trilinear_stamp(pts, UNIT, depth=3)
    assert err.value.index == 0


def test_splat_reproduces_constant_field(rng):
    pts = rng.uniform(0.2, 0.8, size=(500, 3))
    normals = np.tile([0.0, 0.0, 1.0], (500, 1))
    cloud = PointCloud(pts, normals)
    field = splat_vector_field(cloud, UNIT, depth=4)
    total = field.values.sum(axis=(0, 1, 2))
    np.testing.assert_allclose(total, [0.0, 0.0, 1.0], atol=1e-12)


def test_laplacian_of_linear_function_interior():
    n = 17
    x = np.linspace(0, 1, n)
    grid = x[:, None, None] + 2 * x[None, :, None] - x[None, None, :]
    lap = _laplacian_apply(grid)
    # 7-point stencil annihilates linear functions away from the boundary
    np.testing.assert_allclose(lap[1:-1, 1:-1, 1:-1], 0.0, atol=1e-12)


def test_divergence_matches_gradient_sum(rng):
    v = rng.normal(size=(9, 11, 13, 3))
    h = 0.25
    ref = sum(np.gradient(v[..., a], h, axis=a) for a in range(3))
    np.testing.assert_allclose(_divergence(v, h), ref, atol=1e-12)


def test_solver_reaches_tolerance():
    cloud = sphere_cloud(2000, seed=0)
    params = PoissonParams(depth=5)
    domain = bounding_cube(cloud)
    field = splat_vector_field(cloud, domain, params.depth)
    grid = solve_screened_poisson(field, cloud, params.point_weight, params)
    assert grid.solve_info.relative_residual <= params.cg_tolerance
    assert grid.values.shape == (33, 33, 33)


def test_solver_negation_symmetry():
    """Negating every input normal negates the solution, up to solver
    tolerance, because the system is linear in the splatted field."""
    cloud = sphere_cloud(2000, seed=1)
    params = PoissonParams(depth=5)
    domain = bounding_cube(cloud)
    field = splat_vector_field(cloud, domain, params.depth)
    grid_pos = solve_screened_poisson(field, cloud, params.point_weight, params)

    flipped = PointCloud(cloud.points, -cloud.normals)
    field_neg = splat_vector_field(flipped, domain, params.depth)
    grid_neg = solve_screened_poisson(field_neg, flipped, params.point_weight, params)

    scale = np.abs(grid_pos.values).max()
    err = np.abs(grid_pos.values + grid_neg.values).max()
    assert err <= 2 * params.cg_tolerance * max(scale, 1.0)


def test_smoothing_preserves_constants_and_contracts(rng):
    values = rng.normal(size=(33, 33, 33))
    out = smooth_grid_values(np.ones_like(values), passes=4)
    np.testing.assert_allclose(out, 1.0, atol=1e-10)
    sm = smooth_grid_values(values, passes=4)
    assert sm.std() < values.std()


def test_interpolation_exact_for_trilinear_data():
    n = 9
    coords = np.linspace(0, 1, n)
    grid_vals = (coords[:, None, None] * 2.0
                 + coords[None, :, None] * -1.0
                 + coords[None, None, :] * 0.5)
    grid = ScalarGrid(UNIT, 3, grid_vals, None)
    pts = np.array([[0.3, 0.7, 0.2], [0.51, 0.49, 0.93]])
    vals = interpolate_grid(grid, pts)
    expected = 2.0 * pts[:, 0] - pts[:, 1] + 0.5 * pts[:, 2]
    np.testing.assert_allclose(vals, expected, atol=1e-12)


def test_reconstruct_sphere_radial_accuracy():
    cloud = sphere_cloud(8000, seed=2)
    mesh = reconstruct(cloud, PoissonParams(depth=6))
    radii = np.linalg.norm(mesh.vertices - 0.5, axis=1)
    h = bounding_cube(cloud).extent[0] / 64
    assert abs(radii.mean() - 0.4) < 2 * h
    assert radii.std() < 2 * h


def test_reconstruct_orientation_follows_input_normals():
    cloud = sphere_cloud(8000, seed=3)
    mesh = reconstruct(cloud, PoissonParams(depth=5))
    normals = mesh.face_normals()
    outward = mesh.face_centroids() - 0.5
    outward /= np.linalg.norm(outward, axis=1, keepdims=True)
    assert np.mean(np.sum(normals * outward, axis=1)) > 0.95


def test_reconstruct_closed_and_edge_manifold():
    cloud = sphere_cloud(8000, seed=4)
    mesh = reconstruct(cloud, PoissonParams(depth=6))
    edges = np.vstack([mesh.faces[:, [0, 1]], mesh.faces[:, [1, 2]],
                       mesh.faces[:, [2, 0]]])
    edges = np.sort(edges, axis=1)
    _uniq, counts = np.unique(edges, axis=0, return_counts=True)
    assert (counts == 2).all()


def test_laplacian_self_adjoint_under_trapezoid_weights(rng):
    """The mirrored-boundary stencil is self-adjoint in the inner
    product that halves boundary-node weights along each axis."""
    n = 9
    w1 = np.ones(n)
    w1[0] = w1[-1] = 0.5
    w = w1[:, None, None] * w1[None, :, None] * w1[None, None, :]
    x = rng.normal(size=(n, n, n))
    y = rng.normal(size=(n, n, n))
    lhs = (_laplacian_apply(x) * y * w).sum()
    rhs = (_laplacian_apply(y) * x * w).sum()
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_screening_term_symmetric(rng):
    cloud = sphere_cloud(300, seed=5)
    domain = bounding_cube(cloud)
    W = _trilinear_stamp(cloud.points, domain, depth=3)
    x = rng.normal(size=9**3)
    y = rng.normal(size=9**3)
    lhs = (W.T @ (W @ x)) @ y
    rhs = (W.T @ (W @ y)) @ x
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)
