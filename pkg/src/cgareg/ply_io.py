"""Minimal PLY point reader/writer.

Reads the vertex x/y/z properties from ASCII and binary_little_endian files
(the two encodings used by the Stanford scanning repository models); every
other element and property is skipped.  Binary big-endian files are rejected
with a clear message.  Parse errors carry the byte offset at which they were
detected.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PlyError

_SCALAR_TYPES = {
    "char": ("b", 1), "int8": ("b", 1),
    "uchar": ("B", 1), "uint8": ("B", 1),
    "short": ("h", 2), "int16": ("h", 2),
    "ushort": ("H", 2), "uint16": ("H", 2),
    "int": ("i", 4), "int32": ("i", 4),
    "uint": ("I", 4), "uint32": ("I", 4),
    "float": ("f", 4), "float32": ("f", 4),
    "double": ("d", 8), "float64": ("d", 8),
}
_FLOAT_TYPES = {"float", "float32", "double", "float64"}


@dataclass
class PointCloud:
    name: str
    points: np.ndarray  # (n, 3) float64

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)


@dataclass
class _Element:
    name: str
    count: int
    properties: list[tuple[str, str]]  # (type, name); type "list:<ct>:<et>" for lists


def _parse_header(data: bytes, path: str) -> tuple[str, list[_Element], int]:
    if not data.startswith(b"ply"):
        raise PlyError(f"{path}: missing 'ply' magic", offset=0)
    end = data.find(b"end_header")
    if end < 0:
        raise PlyError(f"{path}: header has no end_header line", offset=len(data))
    nl = data.find(b"\n", end)
    if nl < 0:
        raise PlyError(f"{path}: truncated end_header line", offset=end)
    body_start = nl + 1
    header = data[:end].decode("ascii", errors="replace")

    fmt = None
    elements: list[_Element] = []
    offset = 0
    for line in header.splitlines():
        stripped = line.strip()
        fields = stripped.split()
        if not fields or fields[0] in ("ply", "comment", "obj_info"):
            offset += len(line) + 1
            continue
        if fields[0] == "format":
            if len(fields) < 2:
                raise PlyError(f"{path}: malformed format line", offset=offset)
            fmt = fields[1]
            if fmt == "binary_big_endian":
                raise PlyError(
                    f"{path}: binary_big_endian is not supported (only ascii and "
                    "binary_little_endian)", offset=offset,
                )
            if fmt not in ("ascii", "binary_little_endian"):
                raise PlyError(f"{path}: unsupported format keyword {fmt!r}", offset=offset)
        elif fields[0] == "element":
            if len(fields) != 3:
                raise PlyError(f"{path}: malformed element line {stripped!r}", offset=offset)
            try:
                count = int(fields[2])
            except ValueError:
                raise PlyError(f"{path}: bad element count in {stripped!r}", offset=offset)
            elements.append(_Element(fields[1], count, []))
        elif fields[0] == "property":
            if not elements:
                raise PlyError(f"{path}: property before any element", offset=offset)
            if len(fields) >= 2 and fields[1] == "list":
                if len(fields) != 5:
                    raise PlyError(f"{path}: malformed list property {stripped!r}", offset=offset)
                elements[-1].properties.append((f"list:{fields[2]}:{fields[3]}", fields[4]))
            elif len(fields) == 3:
                elements[-1].properties.append((fields[1], fields[2]))
            else:
                raise PlyError(f"{path}: malformed property line {stripped!r}", offset=offset)
        else:
            raise PlyError(f"{path}: unrecognized header line {stripped!r}", offset=offset)
        offset += len(line) + 1
    if fmt is None:
        raise PlyError(f"{path}: header has no format line", offset=0)
    return fmt, elements, body_start


def _vertex_layout(elem: _Element, path: str) -> tuple[int, int, int]:
    names = [n for _, n in elem.properties]
    for axis in ("x", "y", "z"):
        if axis not in names:
            raise PlyError(f"{path}: vertex element lacks property {axis!r}")
    for t, n in elem.properties:
        if n in ("x", "y", "z") and t not in _FLOAT_TYPES:
            raise PlyError(f"{path}: vertex property {n!r} must be float32/float64, got {t!r}")
        if t.startswith("list:"):
            raise PlyError(f"{path}: list properties inside the vertex element are unsupported")
    return names.index("x"), names.index("y"), names.index("z")


def load_ply(path) -> PointCloud:
    """Read the vertex x/y/z coordinates of an ASCII or little-endian PLY file."""
    path = Path(path)
    data = path.read_bytes()
    fmt, elements, body_start = _parse_header(data, path.name)
    vertex = next((e for e in elements if e.name == "vertex"), None)
    if vertex is None:
        raise PlyError(f"{path.name}: no vertex element declared")
    ix, iy, iz = _vertex_layout(vertex, path.name)

    if fmt == "ascii":
        points = _read_ascii(data, body_start, elements, vertex, (ix, iy, iz), path.name)
    else:
        points = _read_binary_le(data, body_start, elements, vertex, (ix, iy, iz), path.name)
    return PointCloud(name=path.stem, points=points)


def _read_ascii(data, body_start, elements, vertex, xyz, name) -> np.ndarray:
    # non-empty rows with their byte offsets, so errors can point at the file
    rows: list[tuple[int, bytes]] = []
    pos = body_start
    for raw in data[body_start:].splitlines(keepends=True):
        stripped = raw.strip()
        if stripped:
            rows.append((pos, stripped))
        pos += len(raw)

    cursor = 0
    points = None
    for elem in elements:
        if cursor + elem.count > len(rows):
            raise PlyError(
                f"{name}: element {elem.name!r} declares {elem.count} rows but only "
                f"{len(rows) - cursor} remain", offset=len(data),
            )
        if elem.name != "vertex":
            cursor += elem.count
            continue
        nprops = len(elem.properties)
        points = np.empty((elem.count, 3))
        for r in range(elem.count):
            offset, row = rows[cursor + r]
            fields = row.split()
            if len(fields) < nprops:
                raise PlyError(
                    f"{name}: vertex row {r} has {len(fields)} fields, expected {nprops}",
                    offset=offset,
                )
            try:
                points[r] = [float(fields[i]) for i in xyz]
            except ValueError:
                raise PlyError(
                    f"{name}: non-numeric vertex coordinate in row {r}", offset=offset
                )
        cursor += elem.count
        break  # everything after the vertex element is ignored
    return points


def _read_binary_le(data, body_start, elements, vertex, xyz, name) -> np.ndarray:
    pos = body_start
    for elem in elements:
        if elem.name != "vertex":
            stride = 0
            for t, pname in elem.properties:
                if t.startswith("list:"):
                    raise PlyError(
                        f"{name}: cannot skip binary element {elem.name!r} with a list "
                        f"property before the vertex data", offset=pos,
                    )
                stride += _SCALAR_TYPES[t][1] if t in _SCALAR_TYPES else _bad_type(name, t, pos)
            pos += stride * elem.count
            continue

        fmt_chars = []
        for t, pname in elem.properties:
            if t not in _SCALAR_TYPES:
                _bad_type(name, t, pos)
            fmt_chars.append(_SCALAR_TYPES[t][0])
        rec = struct.Struct("<" + "".join(fmt_chars))
        needed = rec.size * elem.count
        if len(data) - pos < needed:
            raise PlyError(
                f"{name}: vertex payload truncated ({len(data) - pos} bytes for "
                f"{elem.count} rows of {rec.size})", offset=len(data),
            )
        dtype = np.dtype([(f"f{i}", "<" + {"b": "i1", "B": "u1", "h": "i2", "H": "u2",
                                           "i": "i4", "I": "u4", "f": "f4", "d": "f8"}[c])
                          for i, c in enumerate(fmt_chars)])
        raw = np.frombuffer(data, dtype=dtype, count=elem.count, offset=pos)
        ix, iy, iz = xyz
        points = np.column_stack([
            raw[f"f{ix}"].astype(float),
            raw[f"f{iy}"].astype(float),
            raw[f"f{iz}"].astype(float),
        ])
        return points
    raise PlyError(f"{name}: no vertex element found in body")  # pragma: no cover


def _bad_type(name, t, pos):
    raise PlyError(f"{name}: unsupported property type {t!r}", offset=pos)


def save_ply_ascii(path, points: np.ndarray, comment: str | None = None) -> None:
    """Write points as an ASCII PLY vertex cloud (lossless %.17g floats)."""
    points = np.asarray(points, dtype=float)
    lines = ["ply", "format ascii 1.0"]
    if comment:
        lines.append(f"comment {comment}")
    lines += [
        f"element vertex {len(points)}",
        "property double x",
        "property double y",
        "property double z",
        "end_header",
    ]
    for p in points:
        lines.append(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}")
    Path(path).write_text("\n".join(lines) + "\n")
