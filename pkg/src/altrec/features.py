"""Per-point sharpness estimation from Voronoi covariance measures.

Each point gets a covariance matrix describing the shape of its Voronoi
cell intersected with a ball, estimated by Monte Carlo sampling.  Near a
smooth patch the cell is a thin pencil along the normal; near a crease or
corner it fattens in additional directions.  The ratio of the middle
eigenvalue to the trace therefore acts as a sharpness score, which is
mapped to a per-point projection weight.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInput, LengthMismatch, OutOfRange
from .geometry import PointCloud


@dataclass(frozen=True)
class VcmParams:
    """Parameters for Monte Carlo Voronoi covariance estimation.

    ``ball_radius`` is the radius of the ball intersected with each
    Voronoi cell; ``convolve_radius`` is the radius used to average raw
    covariances over nearby points.  Both default to the same fraction
    of the input's bounding-box diagonal (resolved at compute time when
    left as ``None``).  ``n_samples`` is the number of Monte Carlo
    offsets drawn per point.
    """

    ball_radius: float | None = None
    convolve_radius: float | None = None
    n_samples: int = 150
    radius_fraction: float = 0.05
    seed: int = 0

    def __post_init__(self) -> None:
        if self.ball_radius is not None and self.ball_radius <= 0:
            raise OutOfRange(f"ball_radius must be positive, got {self.ball_radius}")
        if self.convolve_radius is not None and self.convolve_radius <= 0:
            raise OutOfRange(
                f"convolve_radius must be positive, got {self.convolve_radius}"
            )
        if self.n_samples < 1:
            raise OutOfRange(f"n_samples must be >= 1, got {self.n_samples}")
        if self.radius_fraction <= 0:
            raise OutOfRange(
                f"radius_fraction must be positive, got {self.radius_fraction}"
            )


def _sample_ball(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    """Draw ``n`` offsets uniformly from the ball of the given radius."""
    directions = rng.normal(size=(n, 3))
    norms = np.linalg.norm(directions, axis=1, keepdims=True)
    # Degenerate draws are vanishingly rare but would divide by zero.
    norms[norms == 0.0] = 1.0
    directions /= norms
    radii = radius * np.cbrt(rng.uniform(size=(n, 1)))
    return directions * radii


def compute_vcm(cloud: PointCloud, params: VcmParams = VcmParams()) -> np.ndarray:
    """Estimate a (n, 3, 3) covariance tensor of ball-clipped Voronoi cells.

    For each point p, offsets are drawn uniformly from a ball of
    ``ball_radius`` around p and kept only when p is their nearest point
    in the cloud (so they lie in p's Voronoi cell).  The kept offsets'
    second-moment matrix, scaled by the ball volume over the sample
    count, estimates the covariance of the clipped cell.  Raw matrices
    are then averaged over all points within ``convolve_radius`` to
    stabilise the estimate.
    """
    n = len(cloud)
    if n == 0:
        raise EmptyInput("cannot compute covariances of an empty point cloud")
    points = cloud.points
    diag = cloud.bounding_box().diagonal
    ball_r = params.ball_radius
    if ball_r is None:
        ball_r = params.radius_fraction * diag
    conv_r = params.convolve_radius
    if conv_r is None:
        conv_r = params.radius_fraction * diag
    if ball_r <= 0:
        raise OutOfRange("resolved ball radius is not positive; degenerate cloud")

    tree = cKDTree(points)
    rng = np.random.default_rng(params.seed)
    raw = np.zeros((n, 3, 3))
    volume = 4.0 / 3.0 * np.pi * ball_r**3
    chunk = max(1, 2_000_000 // max(params.n_samples, 1))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        m = stop - start
        offsets = _sample_ball(rng, m * params.n_samples, ball_r)
        offsets = offsets.reshape(m, params.n_samples, 3)
        samples = points[start:stop, None, :] + offsets
        _, owner = tree.query(samples.reshape(-1, 3), k=1)
        owner = owner.reshape(m, params.n_samples)
        keep = owner == (np.arange(start, stop)[:, None])
        weighted = np.where(keep[..., None], offsets, 0.0)
        raw[start:stop] = np.einsum("msi,msj->mij", weighted, offsets * keep[..., None])
        raw[start:stop] *= volume / params.n_samples

    neighbor_lists = tree.query_ball_point(points, conv_r)
    counts = np.array([len(idx) for idx in neighbor_lists])
    # every ball contains its own centre, so no group is empty and a
    # single grouped reduction replaces the per-point averaging loop
    flat = np.concatenate(neighbor_lists)
    starts = np.zeros(n, dtype=np.intp)
    np.cumsum(counts[:-1], out=starts[1:])
    sums = np.add.reduceat(raw.reshape(n, 9)[flat], starts, axis=0)
    return (sums / counts[:, None]).reshape(n, 3, 3)


def sharpness_ratio(covariances: np.ndarray) -> np.ndarray:
    """Middle eigenvalue over the trace of each 3x3 covariance, in [0, 1/2].

    Flat regions give ratios near zero (one dominant eigenvalue); sharp
    creases and corners push the middle eigenvalue up toward parity with
    the largest.
    """
    covariances = np.asarray(covariances, dtype=float)
    if covariances.ndim != 3 or covariances.shape[1:] != (3, 3):
        raise OutOfRange(
            f"expected an (n, 3, 3) array, got shape {covariances.shape}"
        )
    sym_gap = np.abs(covariances - covariances.transpose(0, 2, 1)).max(initial=0.0)
    scale = np.abs(covariances).max(initial=0.0)
    if sym_gap > 1e-8 * max(scale, 1.0):
        from .errors import NotSymmetric

        raise NotSymmetric(f"covariance matrices are asymmetric by {sym_gap}")
    eig = np.linalg.eigvalsh(covariances)  # ascending: l3 <= l2 <= l1
    trace = eig.sum(axis=1)
    middle = eig[:, 1]
    safe = np.where(trace > 0.0, trace, 1.0)
    ratio = np.where(trace > 0.0, middle / safe, 0.0)
    return np.clip(ratio, 0.0, 0.5)


def select_threshold_percentile(
    ratios: np.ndarray, percentile: float = 0.9
) -> tuple[float, float]:
    """Pick the sharpness threshold c and falloff width sigma from data.

    c is the value at the given fractional rank of the sorted ratios
    (index ``floor(p * (n - 1))``), clamped away from zero, and sigma is
    half of c.
    """
    ratios = np.asarray(ratios, dtype=float).ravel()
    if ratios.size == 0:
        raise EmptyInput("cannot take a percentile of no ratios")
    if not 0.0 <= percentile <= 1.0:
        raise OutOfRange(f"percentile must be in [0, 1], got {percentile}")
    ordered = np.sort(ratios)
    index = int(np.floor(percentile * (ratios.size - 1)))
    c = max(float(ordered[index]), 1e-9)
    return c, c / 2.0


def lambda_coefficient(
    ratios: np.ndarray, c: float, sigma: float
) -> np.ndarray:
    """Map sharpness ratios to projection weights in [0.1, 1.0].

    Points at or below the threshold c get full weight 1; above it the
    weight decays as a Gaussian in the excess (r - c) with width sigma,
    floored at 0.1 so no point is ever completely frozen.
    """
    ratios = np.asarray(ratios, dtype=float)
    if c <= 0:
        raise OutOfRange(f"threshold c must be positive, got {c}")
    if sigma <= 0:
        raise OutOfRange(f"sigma must be positive, got {sigma}")
    excess = np.maximum(ratios - c, 0.0)
    g = (excess / sigma) ** 2
    return 0.1 + 0.9 * np.exp(-g)


def sharpness_weights(
    cloud: PointCloud,
    params: VcmParams = VcmParams(),
    percentile: float = 0.9,
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Full pipeline: covariances -> ratios -> data-driven weights.

    Returns (weights, ratios, c, sigma).
    """
    cov = compute_vcm(cloud, params)
    ratios = sharpness_ratio(cov)
    c, sigma = select_threshold_percentile(ratios, percentile)
    return lambda_coefficient(ratios, c, sigma), ratios, c, sigma
