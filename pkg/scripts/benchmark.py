#!/usr/bin/env python3
"""Score the denoising pipeline on a set of mesh files.

Each mesh is sampled, corrupted (noise, outliers, optional one-sided
thinning), denoised, and scored before/after against a dense clean
sampling.  The report is a CSV, one row per shape.
"""

import argparse
import sys

from altrec import CorruptionSpec, PipelineConfig, run_benchmark


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("meshes", nargs="+", help="input mesh files (PLY)")
    ap.add_argument("--n", type=int, default=50_000)
    ap.add_argument("--gt-samples", type=int, default=100_000)
    ap.add_argument("--noise-std", type=float, default=1e-2)
    ap.add_argument("--outliers", type=int, default=0)
    ap.add_argument("--density-ratio", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--dmin", type=int, default=6)
    ap.add_argument("--dmax", type=int, default=8)
    ap.add_argument("--tau", type=float, default=5e-3)
    ap.add_argument("--out", help="write the CSV here instead of stdout")
    args = ap.parse_args()

    spec = CorruptionSpec(gaussian_std=args.noise_std,
                          outlier_count=args.outliers,
                          density_ratio=args.density_ratio,
                          seed=args.seed)
    config = PipelineConfig(d_min=args.dmin, d_max=args.dmax, seed=args.seed)
    report = run_benchmark(args.meshes, spec, config, n_points=args.n,
                           gt_samples=args.gt_samples, tau=args.tau)
    if args.out:
        with open(args.out, "w") as f:
            f.write(report)
    else:
        sys.stdout.write(report)


if __name__ == "__main__":
    main()
