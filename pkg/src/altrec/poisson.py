"""Screened Poisson surface reconstruction on a dense node lattice.

The implicit function lives on the (2^d + 1)^3 nodes of a cube at
depth d. The linear system is (h*L + (alpha/N) W^T W) x = -h^3 div V
with L the 7-point Laplacian under mirrored (Neumann) boundary
conditions and W the trilinear stamp matrix of the samples. The
solver is conjugate gradients preconditioned by an exact DCT-I
inverse of the screened constant-coefficient part, which keeps the
iteration count nearly resolution-independent.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.sparse
from skimage.measure import marching_cubes as _skimage_marching_cubes

from .errors import (EmptySurface, MissingNormals, OutOfRange,
                     PointOutsideDomain, SolverDiverged, TooFewPoints)
from .geometry import Aabb, PointCloud, TriangleMesh, bounding_cube


@dataclass(frozen=True)
class PoissonParams:
    depth: int
    point_weight: float = 1.0
    cg_tolerance: float = 1e-6
    cg_max_iters: int = 2000

    def __post_init__(self):
        if not (1 <= self.depth <= 10):
            raise OutOfRange(f"depth must be in [1, 10], got {self.depth}")
        if self.point_weight < 0.0:
            raise OutOfRange(f"point_weight must be >= 0, got {self.point_weight}")
        if self.cg_tolerance <= 0.0:
            raise OutOfRange(f"cg_tolerance must be positive, got {self.cg_tolerance}")
        if self.cg_max_iters < 1:
            raise OutOfRange(f"cg_max_iters must be >= 1, got {self.cg_max_iters}")


@dataclass(frozen=True)
class SolveInfo:
    relative_residual: float
    iterations: int
    wall_time: float


@dataclass(frozen=True)
class ScalarGrid:
    domain: Aabb
    depth: int
    values: np.ndarray  # (n+1, n+1, n+1) with n = 2**depth
    solve_info: SolveInfo | None = field(default=None, compare=False)

    def __post_init__(self):
        n = 2 ** self.depth + 1
        if self.values.shape != (n, n, n):
            raise ValueError(f"values must have shape {(n, n, n)}")

    @property
    def spacing(self) -> float:
        return float(self.domain.extent[0]) / 2 ** self.depth


@dataclass(frozen=True)
class VectorGrid:
    domain: Aabb
    depth: int
    values: np.ndarray  # (n+1, n+1, n+1, 3)

    def __post_init__(self):
        n = 2 ** self.depth + 1
        if self.values.shape != (n, n, n, 3):
            raise ValueError(f"values must have shape {(n, n, n, 3)}")

    @property
    def spacing(self) -> float:
        return float(self.domain.extent[0]) / 2 ** self.depth


def _cell_coords(points: np.ndarray, domain: Aabb, depth: int):
    """Cell indices and in-cell fractions for each point; raises on
    points outside the domain."""
    n = 2 ** depth
    h = float(domain.extent[0]) / n
    u = (points - domain.min) / h
    outside = np.any((u < -1e-9) | (u > n + 1e-9), axis=1)
    if np.any(outside):
        raise PointOutsideDomain(int(np.flatnonzero(outside)[0]))
    i = np.clip(np.floor(u).astype(np.int64), 0, n - 1)
    f = u - i
    return i, f


def _trilinear_stamp(points: np.ndarray, domain: Aabb, depth: int):
    """Sparse (n_points, n_nodes) matrix of trilinear node weights."""
    n = 2 ** depth
    m = n + 1
    i, f = _cell_coords(points, domain, depth)
    rows, cols, vals = [], [], []
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                w = ((f[:, 0] if dx else 1.0 - f[:, 0])
                     * (f[:, 1] if dy else 1.0 - f[:, 1])
                     * (f[:, 2] if dz else 1.0 - f[:, 2]))
                node = ((i[:, 0] + dx) * m + (i[:, 1] + dy)) * m + (i[:, 2] + dz)
                rows.append(np.arange(len(points)))
                cols.append(node)
                vals.append(w)
    W = scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(points), m ** 3))
    return W


def splat_vector_field(cloud: PointCloud, domain: Aabb, depth: int,
                       stamp: scipy.sparse.csr_matrix | None = None) -> VectorGrid:
    """Distribute each point's normal to its cell's 8 nodes with
    trilinear weights; the result is divided by the point count."""
    if not cloud.has_normals:
        raise MissingNormals("splat_vector_field requires a cloud with normals")
    m = 2 ** depth + 1
    if stamp is None:
        stamp = _trilinear_stamp(cloud.points, domain, depth)
    grid = (stamp.T @ cloud.normals) / len(cloud)
    return VectorGrid(domain, depth, grid.reshape(m, m, m, 3))


def _laplacian_apply(x: np.ndarray) -> np.ndarray:
    """7-point stencil 6x - sum(neighbors) with mirrored boundaries."""
    out = 6.0 * x
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(0, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        out[lo] -= x[hi]
        out[hi] -= x[lo]
        # mirror: the ghost neighbor of a boundary node equals its
        # inner neighbor, so that contribution is counted twice
        first_in = [slice(None)] * 3
        first_in[axis] = 1
        first_bd = [slice(None)] * 3
        first_bd[axis] = 0
        last_in = [slice(None)] * 3
        last_in[axis] = -2
        last_bd = [slice(None)] * 3
        last_bd[axis] = -1
        out[tuple(first_bd)] -= x[tuple(first_in)]
        out[tuple(last_bd)] -= x[tuple(last_in)]
    return out


def _divergence(v: np.ndarray, h: float) -> np.ndarray:
    """Central-difference divergence of a node vector field, one-sided
    at the boundary."""
    out = np.zeros(v.shape[:3])
    inv2h = 1.0 / (2.0 * h)
    for axis in range(3):
        # the component slice is strided; one contiguous copy makes
        # the difference stencils below run at memory bandwidth
        comp = np.ascontiguousarray(v[..., axis])
        mid = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo = [slice(None)] * 3
        mid[axis] = slice(1, -1)
        hi[axis] = slice(2, None)
        lo[axis] = slice(0, -2)
        out[tuple(mid)] += (comp[tuple(hi)] - comp[tuple(lo)]) * inv2h
        first = [slice(None)] * 3
        second = [slice(None)] * 3
        first[axis] = 0
        second[axis] = 1
        out[tuple(first)] += (comp[tuple(second)] - comp[tuple(first)]) / h
        last = [slice(None)] * 3
        penult = [slice(None)] * 3
        last[axis] = -1
        penult[axis] = -2
        out[tuple(last)] += (comp[tuple(last)] - comp[tuple(penult)]) / h
    return out


def _dct_eigenvalues(depth: int) -> np.ndarray:
    """Eigenvalues of the mirrored 7-point stencil in the DCT-I basis."""
    n = 2 ** depth
    lam1 = 2.0 - 2.0 * np.cos(np.pi * np.arange(n + 1) / n)
    return (lam1[:, None, None] + lam1[None, :, None] + lam1[None, None, :])


def _trapezoid_weights(depth: int) -> np.ndarray:
    """Node quadrature weights: 1 in the interior, halved on each
    boundary face.  The mirrored Laplacian is self-adjoint under the
    inner product these weights induce, so scaling its rows by them
    yields a plainly symmetric (and positive definite) system that CG
    can rely on."""
    n = 2 ** depth + 1
    w1 = np.ones(n)
    w1[0] = w1[-1] = 0.5
    return w1[:, None, None] * w1[None, :, None] * w1[None, None, :]


class _ScreenedOperator:
    """A x = h * D_w L x + (alpha / N) W^T (W x) with D_w the trapezoid
    weights, plus its DCT preconditioner."""

    def __init__(self, domain: Aabb, depth: int, samples: np.ndarray,
                 point_weight: float,
                 stamp: scipy.sparse.csr_matrix | None = None):
        self.depth = depth
        self.shape = tuple([2 ** depth + 1] * 3)
        self.h = float(domain.extent[0]) / 2 ** depth
        self.weights = _trapezoid_weights(depth)
        self.alpha = point_weight / len(samples) if point_weight > 0 else 0.0
        if point_weight > 0:
            self.W = _trilinear_stamp(samples, domain, depth) if stamp is None else stamp
        else:
            self.W = None
        lam = self.h * _dct_eigenvalues(depth)
        if self.W is not None:
            # Rayleigh quotient of the screening term on the constant
            # mode (which the Laplacian annihilates): alpha * N / size.
            # Matching the true near-null eigenvalue keeps the
            # preconditioned spectrum bounded; smaller values stall CG.
            eps = self.alpha * self.W.shape[0] / lam.size
        else:
            eps = 1e-12 * self.h
        # float32 is plenty for a preconditioner and halves the DCT cost
        self._inv_eig = (1.0 / (lam + eps)).astype(np.float32)
        # DCT-I of length n+1 is orthogonal up to a factor 2n per axis
        self._dct_scale = np.float32(1.0 / (2 ** depth * 2) ** 3)

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = self.h * self.weights * _laplacian_apply(x)
        if self.W is not None:
            stamped = self.W @ x.ravel()
            out += (self.alpha * (self.W.T @ stamped)).reshape(self.shape)
        return out

    def precondition(self, r: np.ndarray) -> np.ndarray:
        coef = scipy.fft.dctn(r.astype(np.float32), type=1)
        coef *= self._inv_eig
        z = scipy.fft.dctn(coef, type=1)
        z *= self._dct_scale
        return z.astype(np.float64)


def _pcg(op: _ScreenedOperator, b: np.ndarray, tol: float, max_iters: int,
         x0: np.ndarray | None = None, restart_every: int = 20):
    """Preconditioned CG with deterministic (non-BLAS) reductions.

    The residual recurrence is replaced by the true residual every
    restart_every iterations, which breaks the round-off plateaus the
    plain recurrence can hit near tolerance.  An initial guess is used
    only when it actually beats the zero start; a stale guess with a
    residual much larger than ``b`` otherwise poisons the recurrence.
    """
    def dot(u, v):
        # single-threaded einsum: no BLAS, no 3D temporary, and a fixed
        # reduction order, so results are reproducible bit-for-bit
        return float(np.einsum("ijk,ijk->", u, v))

    b_norm = np.sqrt(dot(b, b))
    if b_norm == 0.0:
        return np.zeros_like(b), 0.0, 0
    x = np.zeros_like(b) if x0 is None else x0.copy()
    r = b - op.apply(x)
    if x0 is not None and np.sqrt(dot(r, r)) > b_norm:
        x = np.zeros_like(b)
        r = b.copy()
    z = op.precondition(r)
    p = z.copy()
    rz = dot(r, z)
    res = np.sqrt(dot(r, r)) / b_norm
    it = 0
    bad_directions = 0
    while res > tol and it < max_iters:
        Ap = op.apply(p)
        pAp = dot(p, Ap)
        if pAp <= 0.0 or rz <= 0.0:
            # round-off noise in the (single-precision) preconditioner
            # can degenerate the direction near the floor; fall back to
            # a steepest-descent restart on the true residual
            bad_directions += 1
            if bad_directions > 3:
                break
            r = b - op.apply(x)
            res = np.sqrt(dot(r, r)) / b_norm
            if res <= tol:
                break
            p = r.copy()
            rz = dot(r, r)
            continue
        bad_directions = 0
        alpha = rz / pAp
        x += alpha * p
        it += 1
        if it % restart_every == 0:
            r = b - op.apply(x)
        else:
            r -= alpha * Ap
        res = np.sqrt(dot(r, r)) / b_norm
        if res <= tol:
            break
        z = op.precondition(r)
        rz_new = dot(r, z)
        if it % restart_every == 0:
            p = z.copy()
        else:
            p = z + (rz_new / rz) * p
        rz = rz_new
    return x, res, it


class PoissonContext:
    """Cached per-(domain, points, depth) solver state.

    Reusing the context across repeated solves with the same sample
    positions (as the normal-update iteration does) skips rebuilding
    the trilinear stamp and the preconditioner spectrum each time.
    """

    def __init__(self, domain: Aabb, depth: int, points: np.ndarray,
                 point_weight: float):
        self.domain = domain
        self.depth = depth
        self.stamp = _trilinear_stamp(points, domain, depth)
        self.op = _ScreenedOperator(domain, depth, points, point_weight,
                                    stamp=self.stamp)


def solve_screened_poisson(field: VectorGrid, samples: PointCloud,
                           point_weight: float, params: PoissonParams,
                           x0: np.ndarray | None = None,
                           context: PoissonContext | None = None) -> ScalarGrid:
    """Minimize the gradient-matching energy with sample screening.

    Returns the scalar grid whose gradient best matches the splatted
    field; solve_info reports the achieved relative residual.
    """
    if field.depth != params.depth:
        raise ValueError("field depth and params depth must match")
    t0 = time.perf_counter()
    if context is not None:
        op = context.op
    else:
        op = _ScreenedOperator(field.domain, field.depth, samples.points, point_weight)
    # rows of the Laplacian part carry the trapezoid weights, so the
    # divergence right-hand side must carry them too
    b = (-field.spacing ** 3 * op.weights
         * _divergence(field.values, field.spacing))
    x, res, iters = _pcg(op, b, params.cg_tolerance, params.cg_max_iters, x0=x0)
    if res > params.cg_tolerance:
        raise SolverDiverged(res, params.cg_tolerance, iters)
    info = SolveInfo(res, iters, time.perf_counter() - t0)
    return ScalarGrid(field.domain, field.depth, x, solve_info=info)


def smooth_grid_values(values: np.ndarray, passes: int) -> np.ndarray:
    """Apply `passes` rounds of the separable [1/4, 1/2, 1/4] kernel
    (mirror boundary) to a node grid, evaluated spectrally.

    The kernel is diagonal in the DCT-I basis with per-axis multiplier
    ((1 + cos(pi k / n)) / 2) ** passes, so the cost is one transform
    pair regardless of the pass count. Effective Gaussian width is
    about sqrt(passes / 2) cells.
    """
    if passes <= 0:
        return values
    n = values.shape[0] - 1
    m1 = ((1.0 + np.cos(np.pi * np.arange(n + 1) / n)) / 2.0) ** passes
    coef = scipy.fft.dctn(values, type=1)
    coef *= m1[:, None, None]
    coef *= m1[None, :, None]
    coef *= m1[None, None, :]
    out = scipy.fft.dctn(coef, type=1)
    out /= (2 * n) ** 3
    return out


def interpolate_grid(grid: ScalarGrid, points: np.ndarray) -> np.ndarray:
    """Trilinear interpolation of grid values at arbitrary points."""
    i, f = _cell_coords(np.atleast_2d(points), grid.domain, grid.depth)
    v = grid.values
    out = np.zeros(len(i))
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                w = ((f[:, 0] if dx else 1.0 - f[:, 0])
                     * (f[:, 1] if dy else 1.0 - f[:, 1])
                     * (f[:, 2] if dz else 1.0 - f[:, 2]))
                out += w * v[i[:, 0] + dx, i[:, 1] + dy, i[:, 2] + dz]
    return out


def _refine_vertices(verts32: np.ndarray, values: np.ndarray, iso: float) -> np.ndarray:
    """Recompute marching-cubes vertex positions in float64.

    Each vertex lies on a lattice edge: two index coordinates are
    integers and one is fractional. The fractional coordinate is
    re-derived from the float64 grid values so interpolation holds to
    machine precision.
    """
    v = verts32.astype(np.float64)
    rounded = np.rint(v)
    frac_axis = np.argmax(np.abs(v - rounded), axis=1)
    base = rounded.astype(np.int64)
    idx = np.arange(len(v))
    i0 = np.floor(v[idx, frac_axis]).astype(np.int64)
    base[idx, frac_axis] = i0
    step = np.zeros_like(base)
    step[idx, frac_axis] = 1
    n = values.shape[0] - 1
    base = np.clip(base, 0, n)
    upper = np.clip(base + step, 0, n)
    v0 = values[base[:, 0], base[:, 1], base[:, 2]]
    v1 = values[upper[:, 0], upper[:, 1], upper[:, 2]]
    denom = v1 - v0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (iso - v0) / denom
    on_node = np.abs(denom) < 1e-300
    t = np.where(on_node, 0.0, np.clip(t, 0.0, 1.0))
    out = base.astype(np.float64)
    out[idx, frac_axis] += t
    return out


def extract_isosurface(grid: ScalarGrid, iso: float) -> TriangleMesh:
    """Marching-cubes mesh of the level set values == iso.

    Winding convention: face normals point toward decreasing grid
    values. Vertex positions are refined to float64 edge interpolation.
    """
    values = grid.values
    if not (values.min() < iso < values.max()):
        raise EmptySurface(f"no crossing of iso {iso}")
    verts, faces, _, _ = _skimage_marching_cubes(
        values, level=iso, allow_degenerate=False)
    verts = _refine_vertices(verts, values, iso)
    verts = grid.domain.min + verts * grid.spacing
    # skimage's default gradient_direction='descent' yields normals
    # toward increasing values; flip to the documented convention
    faces = faces[:, ::-1].copy()
    return TriangleMesh(verts, faces)


def reconstruct(cloud: PointCloud, params: PoissonParams,
                pad_fraction: float = 0.1, domain: Aabb | None = None,
                x0: np.ndarray | None = None,
                smoothing_passes: int = 2,
                context: PoissonContext | None = None,
                return_grid: bool = False):
    """One screened-Poisson reconstruction from an oriented cloud.

    Composes bounding cube, normal splatting, the screened solve, a
    light post-smoothing of the solution (the trilinear basis is only
    C0, so its raw isosurface normals are blocky), and isosurface
    extraction at the mean sample value. Face normals of the returned
    mesh align with the input normal orientation.
    """
    if not cloud.has_normals:
        raise MissingNormals("reconstruct requires a cloud with normals")
    if len(cloud) < 4:
        raise TooFewPoints("reconstruct needs at least 4 points")
    if context is not None:
        domain = context.domain
    elif domain is None:
        domain = bounding_cube(cloud, pad_fraction)
    field = splat_vector_field(cloud, domain, params.depth,
                               stamp=context.stamp if context else None)
    grid = solve_screened_poisson(field, cloud, params.point_weight, params,
                                  x0=x0, context=context)
    values = smooth_grid_values(grid.values, smoothing_passes)
    smoothed = ScalarGrid(grid.domain, grid.depth, values, solve_info=grid.solve_info)
    iso = float(np.mean(interpolate_grid(smoothed, cloud.points)))
    # gradient of the solution follows the input normals, so extract
    # the negated field: "decreasing -chi" == increasing chi
    neg = ScalarGrid(grid.domain, grid.depth, -values, solve_info=grid.solve_info)
    mesh = extract_isosurface(neg, -iso)
    if return_grid:
        return mesh, grid
    return mesh
