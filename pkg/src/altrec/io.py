"""Point-cloud and mesh file I/O: xyz, ply (ascii / binary LE), obj.

Positions are stored float32 on disk and promoted to float64 in
memory, so write-then-read round-trips to float32 precision.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ParseError, UnsupportedFormat
from .geometry import PointCloud, TriangleMesh

POINT_FORMATS = ("xyz", "ply", "obj")
MESH_FORMATS = ("ply", "obj")


def _format_for(path, fmt: str | None, allowed) -> str:
    if fmt is None:
        fmt = Path(path).suffix.lstrip(".").lower()
    fmt = fmt.lower()
    if fmt not in allowed:
        raise UnsupportedFormat(f"unsupported format {fmt!r} (expected one of {allowed})")
    return fmt


# ---------------------------------------------------------------- xyz

def _read_xyz(path) -> PointCloud:
    pts, nrm = [], []
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (3, 6):
                raise ParseError(path, lineno, f"expected 3 or 6 fields, got {len(parts)}")
            try:
                values = [float(v) for v in parts]
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
            pts.append(values[:3])
            if len(values) == 6:
                nrm.append(values[3:])
    if not pts:
        raise ParseError(path, 0, "no points in file")
    if nrm and len(nrm) != len(pts):
        raise ParseError(path, 0, "only some lines carry normals")
    return PointCloud(np.array(pts), np.array(nrm) if nrm else None)


def _write_xyz(path, cloud: PointCloud) -> None:
    pts = cloud.points.astype(np.float32)
    cols = [pts]
    if cloud.has_normals:
        cols.append(cloud.normals.astype(np.float32))
    np.savetxt(path, np.hstack(cols), fmt="%.9g")


# ---------------------------------------------------------------- ply

def _parse_ply_header(fh, path):
    def next_line(lineno):
        raw = fh.readline()
        if not raw:
            raise ParseError(path, lineno, "unexpected end of header")
        return raw.decode("ascii", errors="replace").strip()

    lineno = 1
    if next_line(lineno) != "ply":
        raise ParseError(path, 1, "missing 'ply' magic")
    fmt = None
    elements = []  # (name, count, [(type, prop)...])
    while True:
        lineno += 1
        line = next_line(lineno)
        if line == "end_header":
            break
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
            if fmt not in ("ascii", "binary_little_endian"):
                raise ParseError(path, lineno, f"unsupported ply format {fmt!r}")
        elif parts[0] == "element":
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError(path, lineno, "property before element")
            if parts[1] == "list":
                elements[-1][2].append(("list", parts[2], parts[3], parts[4]))
            else:
                elements[-1][2].append(("scalar", parts[1], parts[2]))
    if fmt is None:
        raise ParseError(path, lineno, "missing format line")
    return fmt, elements, lineno


_PLY_SCALARS = {
    "char": "b", "int8": "b", "uchar": "B", "uint8": "B",
    "short": "h", "int16": "h", "ushort": "H", "uint16": "H",
    "int": "i", "int32": "i", "uint": "I", "uint32": "I",
    "float": "f", "float32": "f", "double": "d", "float64": "d",
}


def _read_ply(path):
    """Returns (vertices, normals-or-None, faces-or-None)."""
    with open(path, "rb") as fh:
        fmt, elements, header_lines = _parse_ply_header(fh, path)
        verts = normals = faces = None
        lineno = header_lines
        for name, count, props in elements:
            scalar_names = [p[2] for p in props if p[0] == "scalar"]
            if fmt == "ascii":
                rows, face_rows = [], []
                for _ in range(count):
                    lineno += 1
                    raw = fh.readline()
                    if not raw:
                        raise ParseError(path, lineno, f"unexpected end of {name} data")
                    fields = raw.decode("ascii", errors="replace").split()
                    try:
                        if any(p[0] == "list" for p in props):
                            k = int(fields[0])
                            idx = [int(v) for v in fields[1:1 + k]]
                            if len(idx) != k:
                                raise ValueError(f"face lists {k} indices, has {len(idx)}")
                            face_rows.append(idx)
                        else:
                            rows.append([float(v) for v in fields])
                    except (ValueError, IndexError) as exc:
                        raise ParseError(path, lineno, str(exc)) from None
                data = np.array(rows) if rows else None
            else:
                if any(p[0] == "list" for p in props):
                    face_rows = []
                    count_fmt = _PLY_SCALARS[props[0][1]]
                    index_fmt = _PLY_SCALARS[props[0][2]]
                    for _ in range(count):
                        k = struct.unpack("<" + count_fmt,
                                          fh.read(struct.calcsize(count_fmt)))[0]
                        face_rows.append(list(struct.unpack(
                            "<" + index_fmt * k, fh.read(struct.calcsize(index_fmt) * k))))
                    data = None
                else:
                    dtype = np.dtype([(p[2], "<" + _PLY_SCALARS[p[1]]) for p in props])
                    buf = fh.read(dtype.itemsize * count)
                    if len(buf) != dtype.itemsize * count:
                        raise ParseError(path, lineno, f"truncated {name} data")
                    rec = np.frombuffer(buf, dtype=dtype)
                    data = np.column_stack([rec[n].astype(np.float64) for n in rec.dtype.names])
            if name == "vertex":
                for axis in ("x", "y", "z"):
                    if axis not in scalar_names:
                        raise ParseError(path, lineno, f"vertex element lacks {axis}")
                cols = {n: i for i, n in enumerate(scalar_names)}
                verts = data[:, [cols["x"], cols["y"], cols["z"]]]
                if all(n in cols for n in ("nx", "ny", "nz")):
                    normals = data[:, [cols["nx"], cols["ny"], cols["nz"]]]
            elif name == "face":
                for row in face_rows:
                    if len(row) != 3:
                        raise ParseError(path, lineno, "only triangle faces are supported")
                faces = np.array(face_rows, dtype=np.int64) if face_rows else np.zeros((0, 3), np.int64)
        if verts is None:
            raise ParseError(path, lineno, "no vertex element")
        return verts, normals, faces


def _write_ply(path, vertices, normals, faces, binary: bool) -> None:
    has_n = normals is not None
    header = ["ply",
              "format binary_little_endian 1.0" if binary else "format ascii 1.0",
              f"element vertex {len(vertices)}",
              "property float x", "property float y", "property float z"]
    if has_n:
        header += ["property float nx", "property float ny", "property float nz"]
    if faces is not None:
        header += [f"element face {len(faces)}",
                   "property list uchar int vertex_indices"]
    header.append("end_header")
    vdata = vertices.astype(np.float32)
    if has_n:
        vdata = np.hstack([vdata, normals.astype(np.float32)])
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            fh.write(np.ascontiguousarray(vdata, dtype="<f4").tobytes())
            if faces is not None:
                for f in faces:
                    fh.write(struct.pack("<Biii", 3, *(int(i) for i in f)))
        else:
            for row in vdata:
                fh.write((" ".join(f"{v:.9g}" for v in row) + "\n").encode("ascii"))
            if faces is not None:
                for f in faces:
                    fh.write(f"3 {f[0]} {f[1]} {f[2]}\n".encode("ascii"))


# ---------------------------------------------------------------- obj

def _read_obj(path):
    verts, normals, faces = [], [], []
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                if parts[0] == "v":
                    verts.append([float(v) for v in parts[1:4]])
                elif parts[0] == "vn":
                    normals.append([float(v) for v in parts[1:4]])
                elif parts[0] == "f":
                    idx = []
                    for tok in parts[1:]:
                        i = int(tok.split("/")[0])
                        if i == 0:
                            raise ValueError("obj indices are 1-based")
                        idx.append(i - 1 if i > 0 else len(verts) + i)
                    if len(idx) < 3:
                        raise ValueError("face needs at least 3 vertices")
                    for k in range(1, len(idx) - 1):  # fan-triangulate
                        faces.append([idx[0], idx[k], idx[k + 1]])
            except ValueError as exc:
                raise ParseError(path, lineno, str(exc)) from None
    if not verts:
        raise ParseError(path, 0, "no vertices in file")
    for lineno_unused, f in enumerate(faces):
        for i in f:
            if i < 0 or i >= len(verts):
                raise ParseError(path, 0, f"face index {i + 1} out of range")
    return (np.array(verts),
            np.array(normals) if len(normals) == len(verts) else None,
            np.array(faces, dtype=np.int64) if faces else None)


def _write_obj(path, vertices, normals, faces) -> None:
    with open(path, "w") as fh:
        v32 = vertices.astype(np.float32)
        for v in v32:
            fh.write(f"v {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        if normals is not None:
            for v in normals.astype(np.float32):
                fh.write(f"vn {v[0]:.9g} {v[1]:.9g} {v[2]:.9g}\n")
        if faces is not None:
            for f in faces:
                fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


# ---------------------------------------------------------------- public api

def read_points(path, fmt: str | None = None) -> PointCloud:
    fmt = _format_for(path, fmt, POINT_FORMATS)
    if fmt == "xyz":
        return _read_xyz(path)
    if fmt == "ply":
        verts, normals, _ = _read_ply(path)
        return PointCloud(verts, normals)
    verts, normals, _ = _read_obj(path)
    return PointCloud(verts, normals)


def write_points(path, cloud: PointCloud, fmt: str | None = None,
                 binary: bool = False) -> None:
    fmt = _format_for(path, fmt, POINT_FORMATS)
    if fmt == "xyz":
        _write_xyz(path, cloud)
    elif fmt == "ply":
        _write_ply(path, cloud.points, cloud.normals, None, binary)
    else:
        _write_obj(path, cloud.points, cloud.normals, None)


def read_mesh(path, fmt: str | None = None) -> TriangleMesh:
    fmt = _format_for(path, fmt, MESH_FORMATS)
    if fmt == "ply":
        verts, _, faces = _read_ply(path)
    else:
        verts, _, faces = _read_obj(path)
    if faces is None:
        raise ParseError(path, 0, "file has no faces")
    return TriangleMesh(verts, faces)


def write_mesh(path, mesh: TriangleMesh, fmt: str | None = None,
               binary: bool = False) -> None:
    fmt = _format_for(path, fmt, MESH_FORMATS)
    if fmt == "ply":
        _write_ply(path, mesh.vertices, None, mesh.faces, binary)
    else:
        _write_obj(path, mesh.vertices, None, mesh.faces)
