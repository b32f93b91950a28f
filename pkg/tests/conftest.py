import numpy as np
import pytest

from altrec import PointCloud, TriangleMesh


def sphere_cloud(n: int, seed: int, noise: float = 0.0,
                 radius: float = 0.4, center: float = 0.5) -> PointCloud:
    """Uniform samples on a sphere, optionally jittered, with outward
    normals attached only when clean."""
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    pts = center + radius * v
    if noise > 0:
        return PointCloud(pts + rng.normal(0.0, noise, (n, 3)))
    return PointCloud(pts, v.copy())


def cube_mesh(lo: float = 0.0, hi: float = 1.0) -> TriangleMesh:
    """Axis-aligned cube as 12 triangles with outward orientation."""
    l, h = lo, hi
    verts = np.array([
        [l, l, l], [h, l, l], [h, h, l], [l, h, l],
        [l, l, h], [h, l, h], [h, h, h], [l, h, h],
    ], dtype=float)
    faces = np.array([
        [0, 2, 1], [0, 3, 2],  # z = lo
        [4, 5, 6], [4, 6, 7],  # z = hi
        [0, 1, 5], [0, 5, 4],  # y = lo
        [3, 6, 2], [3, 7, 6],  # y = hi
        [0, 4, 7], [0, 7, 3],  # x = lo
        [1, 2, 6], [1, 6, 5],  # x = hi
    ])
    return TriangleMesh(verts, faces)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
