"""Weighted projection of points toward a triangle mesh.

Each point moves a fraction lambda of the way toward its closest point
on the mesh.  Per-point weights let flat regions snap hard while sharp
features move gently, which is how crease geometry survives repeated
smoothing rounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch, OutOfRange
from .geometry import PointCloud, TriangleMesh
from .meshquery import MeshIndex


@dataclass(frozen=True)
class ProjectionResult:
    """Outcome of one projection round.

    ``cloud`` holds the moved points (normals, if any, are preserved
    from the input); ``displacements`` is the per-point distance moved
    and ``targets`` the closest surface points that were blended toward.
    """

    cloud: PointCloud
    displacements: np.ndarray
    targets: np.ndarray

    @property
    def mean_displacement(self) -> float:
        return float(self.displacements.mean())

    @property
    def max_displacement(self) -> float:
        return float(self.displacements.max())


def uniform_lambda(n: int, value: float) -> np.ndarray:
    """A constant weight vector, validated to lie in [0, 1]."""
    if not 0.0 <= value <= 1.0:
        raise OutOfRange(f"projection weight must be in [0, 1], got {value}")
    if n < 1:
        raise EmptyInput(f"need at least one point, got n={n}")
    return np.full(n, float(value))


def lambda_project(
    cloud: PointCloud,
    mesh: TriangleMesh | MeshIndex,
    weights: np.ndarray,
) -> ProjectionResult:
    """Move each point weights[i] of the way to its closest mesh point.

    The update is p' = (1 - w) * p + w * q with q the exact closest
    point on the mesh surface.  Weights must be one scalar per point in
    [0, 1].
    """
    n = len(cloud)
    if n == 0:
        raise EmptyInput("cannot project an empty point cloud")
    weights = np.asarray(weights, dtype=float).ravel()
    if weights.shape[0] != n:
        raise LengthMismatch(
            f"{weights.shape[0]} weights for {n} points"
        )
    if weights.min(initial=0.0) < 0.0 or weights.max(initial=0.0) > 1.0:
        raise OutOfRange("projection weights must lie in [0, 1]")
    index = mesh if isinstance(mesh, MeshIndex) else MeshIndex(mesh)
    targets, _faces, _normals, _dists = index.query(cloud.points)
    moved = cloud.points + weights[:, None] * (targets - cloud.points)
    displacements = np.linalg.norm(moved - cloud.points, axis=1)
    out = PointCloud(moved, cloud.normals)
    return ProjectionResult(out, displacements, targets)
