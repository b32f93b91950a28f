"""altrec: point-cloud denoising by alternating implicit surface
reconstruction with weighted projection of the points onto the surface.

The top-level entry points are :func:`run_pipeline` for the full
denoising loop, :func:`run_ipsr` for a single orientation-and-
reconstruction pass, and :func:`reconstruct` for one solve from
oriented points.
"""

__version__ = "0.1.0"

from .bench import (
    CorruptionSpec,
    add_gaussian_noise,
    add_outliers,
    corrupt,
    run_benchmark,
    vary_density,
)
from .errors import AltrecError
from .features import (
    VcmParams,
    compute_vcm,
    lambda_coefficient,
    select_threshold_percentile,
    sharpness_ratio,
    sharpness_weights,
)
from .geometry import (
    Aabb,
    PointCloud,
    TriangleMesh,
    bounding_cube,
    denormalize,
    normalize_to_unit,
    sample_mesh_uniform,
)
from .io import read_mesh, read_points, write_mesh, write_points
from .ipsr import IpsrConfig, IpsrResult, run_ipsr
from .metrics import chamfer_l1, evaluate, f_score, mads, normal_consistency, rmsd
from .meshquery import MeshIndex, build_mesh_index, closest_point_on_mesh
from .pipeline import (
    FixedLambda,
    PercentileLambda,
    PipelineConfig,
    PipelineReport,
    UniformLambda,
    depth_schedule,
    run_pipeline,
    select_initial_depth,
)
from .poisson import PoissonParams, extract_isosurface, reconstruct, solve_screened_poisson
from .projection import ProjectionResult, lambda_project, uniform_lambda

__all__ = [
    "Aabb",
    "AltrecError",
    "CorruptionSpec",
    "FixedLambda",
    "IpsrConfig",
    "IpsrResult",
    "MeshIndex",
    "PercentileLambda",
    "PipelineConfig",
    "PipelineReport",
    "PointCloud",
    "PoissonParams",
    "ProjectionResult",
    "TriangleMesh",
    "UniformLambda",
    "VcmParams",
    "add_gaussian_noise",
    "add_outliers",
    "bounding_cube",
    "build_mesh_index",
    "chamfer_l1",
    "closest_point_on_mesh",
    "compute_vcm",
    "corrupt",
    "denormalize",
    "depth_schedule",
    "evaluate",
    "extract_isosurface",
    "f_score",
    "lambda_coefficient",
    "lambda_project",
    "mads",
    "normal_consistency",
    "normalize_to_unit",
    "read_mesh",
    "read_points",
    "reconstruct",
    "rmsd",
    "run_benchmark",
    "run_ipsr",
    "run_pipeline",
    "sample_mesh_uniform",
    "select_initial_depth",
    "select_threshold_percentile",
    "sharpness_ratio",
    "sharpness_weights",
    "solve_screened_poisson",
    "uniform_lambda",
    "write_mesh",
    "write_points",
]
