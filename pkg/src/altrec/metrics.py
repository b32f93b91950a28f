"""Quality metrics for denoised point clouds and reconstructed meshes.

All set-to-set metrics are nearest-neighbour based and computed exactly
with a KD-tree; nothing here is stochastic.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInput, LengthMismatch
from .geometry import PointCloud, TriangleMesh, normalize_unit_vectors


def _points(obj) -> np.ndarray:
    if isinstance(obj, PointCloud):
        return obj.points
    arr = np.asarray(obj, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise EmptyInput(f"expected an (n, 3) array, got shape {arr.shape}")
    return arr


def _require_nonempty(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyInput("metrics need at least one point on each side")


def rmsd(predicted, reference) -> float:
    """Root mean squared distance from each predicted point to the
    nearest reference point."""
    p = _points(predicted)
    r = _points(reference)
    _require_nonempty(p, r)
    d, _ = cKDTree(r).query(p, k=1)
    return float(np.sqrt(np.mean(d**2)))


def mads(predicted, reference) -> float:
    """Mean absolute distance from each predicted point to the nearest
    reference point."""
    p = _points(predicted)
    r = _points(reference)
    _require_nonempty(p, r)
    d, _ = cKDTree(r).query(p, k=1)
    return float(np.mean(d))


def chamfer_l1(a, b) -> float:
    """Symmetric mean nearest-neighbour distance between two point sets.

    Average of the mean distance from a to b and from b to a.
    """
    pa = _points(a)
    pb = _points(b)
    _require_nonempty(pa, pb)
    d_ab, _ = cKDTree(pb).query(pa, k=1)
    d_ba, _ = cKDTree(pa).query(pb, k=1)
    return float(0.5 * (np.mean(d_ab) + np.mean(d_ba)))


def normal_consistency(
    predicted: PointCloud, reference: PointCloud
) -> float:
    """For each reference point, the absolute cosine between its normal
    and the normal of the nearest predicted point, averaged.

    Uses the absolute dot product so globally flipped orientations still
    score as consistent geometry.
    """
    for name, c in (("predicted", predicted), ("reference", reference)):
        if c.normals is None:
            from .errors import MissingNormals

            raise MissingNormals(f"{name} cloud has no normals")
    _require_nonempty(predicted.points, reference.points)
    np_pred = normalize_unit_vectors(predicted.normals)
    np_ref = normalize_unit_vectors(reference.normals)
    _, idx = cKDTree(predicted.points).query(reference.points, k=1)
    return float(np.abs(np.sum(np_ref * np_pred[idx], axis=1)).mean())


def f_score(predicted, reference, tau: float = 5e-3) -> float:
    """Harmonic mean of precision and recall at distance threshold tau.

    Precision: fraction of predicted points within tau of the
    reference.  Recall: fraction of reference points within tau of the
    prediction.  Returns 0 when both are zero.
    """
    p = _points(predicted)
    r = _points(reference)
    _require_nonempty(p, r)
    if tau <= 0:
        from .errors import OutOfRange

        raise OutOfRange(f"tau must be positive, got {tau}")
    d_pr, _ = cKDTree(r).query(p, k=1)
    d_rp, _ = cKDTree(p).query(r, k=1)
    precision = float(np.mean(d_pr <= tau))
    recall = float(np.mean(d_rp <= tau))
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def evaluate(
    predicted: PointCloud, reference: PointCloud, tau: float = 5e-3
) -> dict:
    """All metrics at once, as a plain dict suitable for CSV rows.

    Normal consistency is included only when both clouds carry normals.
    """
    out = {
        "rmsd": rmsd(predicted, reference),
        "mads": mads(predicted, reference),
        "chamfer_l1": chamfer_l1(predicted, reference),
        "nc": (
            normal_consistency(predicted, reference)
            if predicted.normals is not None and reference.normals is not None
            else float("nan")
        ),
        "f_score": f_score(predicted, reference, tau),
        "n_pred": len(predicted),
        "n_gt": len(reference),
        "tau": tau,
    }
    return out
