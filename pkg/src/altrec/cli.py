"""Command-line interface.

Subcommands:
    denoise  run the full alternating denoising pipeline on a point file
    ipsr     single reconstruction from unoriented points at a fixed depth
    eval     score a prediction against ground truth (meshes or points)
    synth    sample a mesh and apply synthetic corruption
    vcm      per-point sharpness ratios and projection weights as CSV

All commands exit 0 on success; on failure they print one line
``error: <ExceptionType>: <message>`` to stderr and exit 1.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .bench import CorruptionSpec, corrupt
from .errors import AltrecError, UnsupportedFormat
from .features import VcmParams, compute_vcm, lambda_coefficient, \
    select_threshold_percentile, sharpness_ratio
from .geometry import PointCloud, normalize_to_unit, sample_mesh_uniform
from .io import read_mesh, read_points, write_mesh, write_points
from .ipsr import IpsrConfig, run_ipsr
from .metrics import evaluate
from .pipeline import (
    FixedLambda,
    PercentileLambda,
    PipelineConfig,
    UniformLambda,
    run_pipeline,
)

_MESH_EXTS = {".ply", ".obj"}


def _is_mesh_path(path: str) -> bool:
    import os

    return os.path.splitext(path)[1].lower() in _MESH_EXTS


def _load_points(path: str) -> PointCloud:
    """Read either a point file or a mesh (meshes are densely sampled)."""
    try:
        return read_points(path)
    except (AltrecError, ValueError):
        mesh = read_mesh(path)
        return sample_mesh_uniform(mesh, 100_000, seed=0)


def _cmd_denoise(args: argparse.Namespace) -> int:
    cloud = read_points(args.infile)
    if args.lambda_c == "auto":
        mode = PercentileLambda()
    elif args.lambda_c == "uniform":
        mode = UniformLambda(args.early_lambda if args.lambda_sigma is None
                             else args.lambda_sigma)
    else:
        c = float(args.lambda_c)
        sigma = args.lambda_sigma if args.lambda_sigma is not None else c / 2.0
        mode = FixedLambda(c, sigma)
    config = PipelineConfig(
        d_min=args.dmin,
        d_max=args.dmax,
        outer_iters=args.iters,
        d_sharp=args.dsharp,
        point_weight=args.point_weight,
        early_lambda=args.early_lambda,
        lambda_mode=mode,
        seed=args.seed,
    )
    gt = read_mesh(args.gt) if args.gt else None
    denoised, mesh, report = run_pipeline(cloud, config, gt)
    write_points(args.out, denoised)
    if args.mesh:
        write_mesh(args.mesh, mesh)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(report.to_csv())
    print(f"d0={report.d0} schedule={report.schedule} "
          f"n={len(denoised)} out={args.out}")
    return 0


def _cmd_ipsr(args: argparse.Namespace) -> int:
    cloud = read_points(args.infile)
    config = IpsrConfig(
        depth=args.depth,
        max_iters=args.max_iters,
        point_weight=args.point_weight,
        seed=args.seed,
    )
    result = run_ipsr(cloud, config)
    write_mesh(args.out, result.mesh)
    final_v = result.variation_history[-1] if result.variation_history else 0.0
    print(f"iterations={result.iterations} converged={result.converged} "
          f"final_v={final_v:.6g} out={args.out}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    def load(path: str) -> PointCloud:
        if _is_mesh_path(path):
            mesh = read_mesh(path)
            return sample_mesh_uniform(mesh, args.samples, seed=args.seed)
        return read_points(path)

    pred = load(args.pred)
    gt = load(args.gt)
    scores = evaluate(pred, gt, args.tau)
    keys = ["rmsd", "mads", "chamfer_l1", "nc", "f_score", "n_pred", "n_gt", "tau"]
    print(",".join(keys))
    print(",".join(
        str(scores[k]) if isinstance(scores[k], int) else f"{scores[k]:.17g}"
        for k in keys
    ))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    mesh = read_mesh(args.infile)
    cloud = sample_mesh_uniform(mesh, args.n, seed=args.seed)
    cloud, _scale, _offset = normalize_to_unit(cloud)
    spec = CorruptionSpec(
        gaussian_std=args.noise_std,
        outlier_count=args.outliers,
        density_ratio=args.density_ratio,
        seed=args.seed,
    )
    noisy = corrupt(cloud, spec)
    write_points(args.out, noisy)
    print(f"n={len(noisy)} out={args.out}")
    return 0


def _cmd_vcm(args: argparse.Namespace) -> int:
    cloud = read_points(args.infile)
    params = VcmParams(
        ball_radius=args.offset_r,
        convolve_radius=args.conv_r,
        n_samples=args.mc_samples,
        seed=args.seed,
    )
    cov = compute_vcm(cloud, params)
    ratios = sharpness_ratio(cov)
    c, sigma = select_threshold_percentile(ratios)
    lam = lambda_coefficient(ratios, c, sigma)
    with open(args.out, "w") as fh:
        fh.write("index,x,y,z,ratio,lambda\n")
        for i, (p, r, w) in enumerate(zip(cloud.points, ratios, lam)):
            fh.write(f"{i},{p[0]:.17g},{p[1]:.17g},{p[2]:.17g},"
                     f"{r:.17g},{w:.17g}\n")
    print(f"c={c:.17g} sigma={sigma:.17g} out={args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="altrec",
        description="Point-cloud denoising by alternating surface "
                    "reconstruction and weighted projection.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="run the full denoising pipeline")
    d.add_argument("--in", dest="infile", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--mesh", default=None, help="also write the final surface")
    d.add_argument("--dmin", type=int, default=6)
    d.add_argument("--dmax", type=int, default=8)
    d.add_argument("--iters", type=int, default=5)
    d.add_argument("--dsharp", type=int, default=8)
    d.add_argument("--point-weight", type=float, default=1.0)
    d.add_argument("--early-lambda", type=float, default=0.5)
    d.add_argument("--lambda-c", default="auto",
                   help="'auto' (percentile rule), 'uniform', or a fixed "
                        "threshold value")
    d.add_argument("--lambda-sigma", type=float, default=None)
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--report", default=None, help="per-iteration CSV path")
    d.add_argument("--gt", default=None, help="ground-truth mesh for report "
                                              "RMSD columns")
    d.set_defaults(func=_cmd_denoise)

    p = sub.add_parser("ipsr", help="single-shot reconstruction from "
                                    "unoriented points")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True, help="output mesh path")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--point-weight", type=float, default=1.0)
    p.add_argument("--max-iters", type=int, default=30)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_ipsr)

    e = sub.add_parser("eval", help="score prediction against ground truth")
    e.add_argument("--pred", required=True)
    e.add_argument("--gt", required=True)
    e.add_argument("--samples", type=int, default=100_000)
    e.add_argument("--tau", type=float, default=5e-3)
    e.add_argument("--seed", type=int, default=0)
    e.set_defaults(func=_cmd_eval)

    s = sub.add_parser("synth", help="sample and corrupt a mesh")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--noise-std", type=float, default=0.0)
    s.add_argument("--outliers", type=int, default=0)
    s.add_argument("--density-ratio", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_cmd_synth)

    v = sub.add_parser("vcm", help="per-point sharpness and weights")
    v.add_argument("--in", dest="infile", required=True)
    v.add_argument("--out", required=True)
    v.add_argument("--offset-r", type=float, default=None)
    v.add_argument("--conv-r", type=float, default=None)
    v.add_argument("--mc-samples", type=int, default=500)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=_cmd_vcm)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
