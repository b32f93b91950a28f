"""Closest-point queries against a triangle mesh.

A MeshIndex prunes candidate faces with a kd-tree over face centroids;
exact point-triangle distances decide among the survivors, so results
match the brute-force scan over all faces. Degenerate (zero-area)
faces are excluded from the index.
"""
from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyMesh
from .geometry import TriangleMesh


def closest_point_on_triangles(p: np.ndarray, a: np.ndarray, b: np.ndarray,
                               c: np.ndarray) -> np.ndarray:
    """Closest point to p on each triangle (a, b, c); all inputs (m, 3).

    Vectorized version of the standard region-classification algorithm
    (Ericson, Real-Time Collision Detection).
    """
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)

    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)

    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    out = np.empty_like(p)
    done = np.zeros(len(p), dtype=bool)

    def assign(mask, value):
        use = mask & ~done
        out[use] = value[use]
        done[use] = True

    # vertex regions
    assign((d1 <= 0) & (d2 <= 0), a)
    assign((d3 >= 0) & (d4 <= d3), b)
    assign((d6 >= 0) & (d5 <= d6), c)

    # edge AB
    vc = d1 * d4 - d3 * d2
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = d1 / (d1 - d3)
    assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + v_ab[:, None] * ab)

    # edge AC
    vb = d5 * d2 - d1 * d6
    with np.errstate(divide="ignore", invalid="ignore"):
        w_ac = d2 / (d2 - d6)
    assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + w_ac[:, None] * ac)

    # edge BC
    va = d3 * d6 - d5 * d4
    with np.errstate(divide="ignore", invalid="ignore"):
        w_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
    assign((va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0), b + w_bc[:, None] * (c - b))

    # interior
    denom = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v = vb / denom
        w = vc / denom
    assign(np.ones(len(p), dtype=bool), a + v[:, None] * ab + w[:, None] * ac)
    return out


class MeshIndex:
    """Immutable spatial index over a mesh's positive-area faces.

    Safe for concurrent readers; queries are pure.
    """

    def __init__(self, mesh: TriangleMesh):
        areas = mesh.face_areas()
        keep = np.flatnonzero(areas > 0.0)
        if len(keep) == 0:
            raise EmptyMesh("cannot index a mesh without positive-area faces")
        self.mesh = mesh
        self._face_ids = keep
        a, b, c = mesh.triangle_corners()
        self._a, self._b, self._c = a[keep], b[keep], c[keep]
        self._normals = mesh.face_normals()[keep]
        centroids = (self._a + self._b + self._c) / 3.0
        # max corner-centroid distance bounds how far a face can reach
        # beyond its centroid
        self._radius = np.max(
            np.stack([
                np.linalg.norm(self._a - centroids, axis=1),
                np.linalg.norm(self._b - centroids, axis=1),
                np.linalg.norm(self._c - centroids, axis=1),
            ]),
        )
        self._tree = cKDTree(centroids)

    def query(self, points: np.ndarray, chunk: int = 8192):
        """Closest surface points for a batch of queries.

        Returns (closest (n,3), face indices (n,), face normals (n,3),
        distances (n,)). Ties on distance resolve to the lowest face
        index of the original mesh.
        """
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        n = len(points)
        q = np.empty((n, 3))
        face = np.empty(n, dtype=np.int64)
        normal = np.empty((n, 3))
        dist = np.empty(n)
        for start in range(0, n, chunk):
            sl = slice(start, min(start + chunk, n))
            self._query_chunk(points[sl], q[sl], face[sl], normal[sl], dist[sl])
        return q, face, normal, dist

    def _query_chunk(self, pts, q_out, face_out, normal_out, dist_out):
        d_centroid, _ = self._tree.query(pts)
        # any face whose closest point could beat the centroid bound
        # has its centroid within d_centroid + max face radius
        cand_lists = self._tree.query_ball_point(pts, d_centroid + self._radius + 1e-12)
        counts = np.fromiter((len(c) for c in cand_lists), dtype=np.int64, count=len(pts))
        flat = np.concatenate([np.asarray(c, dtype=np.int64) for c in cand_lists])
        owner = np.repeat(np.arange(len(pts)), counts)
        closest = closest_point_on_triangles(
            pts[owner], self._a[flat], self._b[flat], self._c[flat])
        d = np.linalg.norm(closest - pts[owner], axis=1)
        # lexicographic (distance, original face id) minimum per query
        order = np.lexsort((self._face_ids[flat], d, owner))
        starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        best = order[starts]
        q_out[:] = closest[best]
        face_out[:] = self._face_ids[flat[best]]
        normal_out[:] = self._normals[flat[best]]
        dist_out[:] = d[best]


def build_mesh_index(mesh: TriangleMesh) -> MeshIndex:
    return MeshIndex(mesh)


def closest_point_on_mesh(
    p, mesh: TriangleMesh | MeshIndex
) -> tuple[np.ndarray, int, np.ndarray, float]:
    """Single-point convenience wrapper around MeshIndex.query."""
    index = mesh if isinstance(mesh, MeshIndex) else MeshIndex(mesh)
    q, face, normal, dist = index.query(np.asarray(p, dtype=np.float64)[None, :])
    return q[0], int(face[0]), normal[0], float(dist[0])


def closest_point_brute_force(mesh: TriangleMesh, p) -> tuple[np.ndarray, int, np.ndarray, float]:
    """Exhaustive scan over all faces; the test oracle for MeshIndex."""
    areas = mesh.face_areas()
    keep = np.flatnonzero(areas > 0.0)
    if len(keep) == 0:
        raise EmptyMesh("mesh has no positive-area faces")
    a, b, c = mesh.triangle_corners()
    p = np.asarray(p, dtype=np.float64)
    pts = np.broadcast_to(p, (len(keep), 3))
    closest = closest_point_on_triangles(pts.copy(), a[keep], b[keep], c[keep])
    d = np.linalg.norm(closest - p, axis=1)
    i = int(np.argmin(d))  # argmin takes the first, i.e. lowest face index
    fid = int(keep[i])
    return closest[i], fid, mesh.face_normals()[fid], float(d[i])
