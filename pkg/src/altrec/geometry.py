"""Core geometric value types and operations on point clouds and meshes.

Points, normals, vertices and faces are stored as numpy arrays
(float64 for coordinates, int for face indices). All containers are
treated as immutable after construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateExtent, EmptyMesh, LengthMismatch, TooFewPoints


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box with min <= max componentwise."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "min", np.asarray(self.min, dtype=np.float64))
        object.__setattr__(self, "max", np.asarray(self.max, dtype=np.float64))
        if not np.all(self.min <= self.max):
            raise ValueError("Aabb requires min <= max componentwise")

    @property
    def extent(self) -> np.ndarray:
        return self.max - self.min

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.min + self.max)

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def contains(self, points: np.ndarray, atol: float = 0.0) -> np.ndarray:
        p = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return np.all((p >= self.min - atol) & (p <= self.max + atol), axis=1)


@dataclass(frozen=True)
class PointCloud:
    """Ordered point set, optionally carrying unit normals.

    Index order is stable: point i keeps its identity through every
    operation that moves points.
    """

    points: np.ndarray
    normals: np.ndarray | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) < 1:
            raise ValueError("points must be a nonempty (n, 3) array")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.ascontiguousarray(np.asarray(self.normals, dtype=np.float64))
            if nrm.shape != pts.shape:
                raise LengthMismatch("normals must match points in shape")
            object.__setattr__(self, "normals", nrm)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def has_normals(self) -> bool:
        return self.normals is not None

    def bounding_box(self) -> Aabb:
        return Aabb(self.points.min(axis=0), self.points.max(axis=0))

    def with_normals(self, normals: np.ndarray) -> "PointCloud":
        return PointCloud(self.points, normals)

    def without_normals(self) -> "PointCloud":
        return PointCloud(self.points)


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle surface with counterclockwise winding."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        verts = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        faces = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise ValueError("vertices must be an (m, 3) array")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError("faces must be an (f, 3) index array")
        if len(faces) and (faces.min() < 0 or faces.max() >= len(verts)):
            raise ValueError("face index out of range")
        if len(faces) and np.any(
            (faces[:, 0] == faces[:, 1])
            | (faces[:, 1] == faces[:, 2])
            | (faces[:, 0] == faces[:, 2])
        ):
            raise ValueError("face repeats a vertex index")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "faces", faces)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def triangle_corners(self):
        """Corner coordinate arrays (a, b, c), each (f, 3)."""
        v, f = self.vertices, self.faces
        return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    def face_cross(self) -> np.ndarray:
        a, b, c = self.triangle_corners()
        return np.cross(b - a, c - a)

    def face_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.face_cross(), axis=1)

    def face_normals(self) -> np.ndarray:
        """Unit normals from counterclockwise winding; zero for degenerate faces."""
        cross = self.face_cross()
        norm = np.linalg.norm(cross, axis=1)
        out = np.zeros_like(cross)
        ok = norm > 0.0
        out[ok] = cross[ok] / norm[ok, None]
        return out

    def face_centroids(self) -> np.ndarray:
        a, b, c = self.triangle_corners()
        return (a + b + c) / 3.0


def normalize_unit_vectors(v: np.ndarray, atol: float = 1e-6) -> np.ndarray:
    """Renormalize rows of v to unit length, checking none is near zero."""
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm < atol):
        raise ValueError("cannot normalize near-zero vector")
    return v / norm


def normalize_to_unit(cloud: PointCloud) -> tuple[PointCloud, float, np.ndarray]:
    """Rescale a cloud so its maximum axis extent is exactly 1.

    Returns (normalized cloud, scale, offset) with
    normalized = scale * (points - offset); the pair inverts the
    transform via points = normalized / scale + offset. Normals are
    carried over unchanged.
    """
    if len(cloud) < 2:
        raise TooFewPoints("normalize_to_unit needs at least 2 points")
    box = cloud.bounding_box()
    max_extent = float(box.extent.max())
    if max_extent <= 0.0:
        raise DegenerateExtent("all points coincide")
    scale = 1.0 / max_extent
    offset = box.min.copy()
    out = PointCloud(scale * (cloud.points - offset), cloud.normals)
    return out, scale, offset


def denormalize(cloud: PointCloud, scale: float, offset: np.ndarray) -> PointCloud:
    """Invert normalize_to_unit."""
    return PointCloud(cloud.points / scale + offset, cloud.normals)


def bounding_cube(cloud: PointCloud, pad_fraction: float = 0.1) -> Aabb:
    """Padded cube centered on the cloud's bounding box.

    Side length is (1 + pad_fraction) times the maximum axis extent, so
    the cube always contains every point.
    """
    if pad_fraction < 0.0:
        raise ValueError("pad_fraction must be >= 0")
    box = cloud.bounding_box()
    max_extent = float(box.extent.max())
    if max_extent <= 0.0:
        raise DegenerateExtent("all points coincide")
    half = 0.5 * (1.0 + pad_fraction) * max_extent
    center = box.center
    return Aabb(center - half, center + half)


def sample_mesh_uniform(mesh: TriangleMesh, n: int, seed: int) -> PointCloud:
    """Draw n points uniformly by area over the mesh surface.

    Faces are chosen proportionally to area, positions uniformly within
    each face; each sample carries its source face's normal. Zero-area
    faces are never selected. Deterministic for a fixed seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    areas = mesh.face_areas()
    total = areas.sum()
    if mesh.n_faces == 0 or total <= 0.0:
        raise EmptyMesh("mesh has no positive-area face")
    rng = np.random.default_rng(seed)
    face_idx = rng.choice(mesh.n_faces, size=n, p=areas / total)
    # uniform barycentric sampling via the sqrt trick
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    a, b, c = mesh.triangle_corners()
    a, b, c = a[face_idx], b[face_idx], c[face_idx]
    pts = (1.0 - r1)[:, None] * a + (r1 * (1.0 - r2))[:, None] * b + (r1 * r2)[:, None] * c
    normals = mesh.face_normals()[face_idx]
    return PointCloud(pts, normals)
