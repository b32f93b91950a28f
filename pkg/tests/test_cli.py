import numpy as np
import pytest

from altrec import (
    PointCloud,
    PoissonParams,
    read_mesh,
    read_points,
    reconstruct,
    write_mesh,
    write_points,
)
from altrec.cli import main

from conftest import sphere_cloud


@pytest.fixture(scope="module")
def sphere_mesh_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "sphere.ply"
    mesh = reconstruct(sphere_cloud(4000, seed=0), PoissonParams(depth=5))
    write_mesh(str(path), mesh)
    return str(path)


def test_synth_and_eval(sphere_mesh_path, tmp_path, capsys):
    out = tmp_path / "noisy.xyz"
    rc = main(["synth", "--in", sphere_mesh_path, "--out", str(out),
               "--n", "3000", "--noise-std", "0.005", "--seed", "1"])
    assert rc == 0
    cloud = read_points(str(out))
    assert len(cloud) == 3000

    rc = main(["eval", "--pred", str(out), "--gt", str(out), "--tau", "1e-3"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().split("\n")
    header = lines[-2].split(",")
    values = lines[-1].split(",")
    row = dict(zip(header, values))
    assert float(row["rmsd"]) == 0.0
    assert float(row["f_score"]) == 1.0


def test_ipsr_command(tmp_path, capsys):
    pts = tmp_path / "pts.xyz"
    write_points(str(pts), PointCloud(sphere_cloud(3000, seed=2).points))
    out = tmp_path / "mesh.ply"
    rc = main(["ipsr", "--in", str(pts), "--out", str(out),
               "--depth", "4", "--seed", "0"])
    assert rc == 0
    mesh = read_mesh(str(out))
    assert len(mesh.faces) > 0
    assert "converged" in capsys.readouterr().out


def test_vcm_command(tmp_path):
    pts = tmp_path / "pts.xyz"
    write_points(str(pts), PointCloud(sphere_cloud(500, seed=3).points))
    out = tmp_path / "vcm.csv"
    rc = main(["vcm", "--in", str(pts), "--out", str(out),
               "--mc-samples", "100", "--seed", "0"])
    assert rc == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "index,x,y,z,ratio,lambda"
    assert len(lines) == 501
    ratio = float(lines[1].split(",")[4])
    lam = float(lines[1].split(",")[5])
    assert 0.0 <= ratio <= 0.5
    assert 0.1 <= lam <= 1.0


def test_denoise_command(tmp_path, capsys):
    pts = tmp_path / "noisy.xyz"
    noisy = sphere_cloud(2500, seed=4, noise=0.01)
    write_points(str(pts), noisy)
    out = tmp_path / "denoised.xyz"
    report = tmp_path / "report.csv"
    rc = main(["denoise", "--in", str(pts), "--out", str(out),
               "--dmin", "4", "--dmax", "4", "--iters", "2",
               "--seed", "0", "--report", str(report)])
    assert rc == 0
    denoised = read_points(str(out))
    assert len(denoised) == 2500
    lines = report.read_text().strip().split("\n")
    assert lines[0] == "iter,depth,ipsr_iters,final_v,mean_disp,rmsd,time_ms"
    assert len(lines) == 3


def test_error_exit_code(tmp_path, capsys):
    rc = main(["denoise", "--in", str(tmp_path / "missing.xyz"),
               "--out", str(tmp_path / "o.xyz")])
    assert rc == 1
    err = capsys.readouterr().err
    assert err.startswith("error: ")


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
