"""PLY point cloud reader/writer.

Supports `format ascii 1.0` and `format binary_little_endian 1.0`, element
`vertex` with float32 x/y/z and uint8 red/green/blue. Extra fixed-size
properties are skipped; elements after vertex are ignored; fixed-size
elements before vertex are skipped. Both formats parse to identical clouds.
"""

from __future__ import annotations

import numpy as np

from ..cloud import PointCloud
from ..errors import PlyParseError

_SCALAR_TYPES = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}

_REQUIRED = {"x": "f4", "y": "f4", "z": "f4", "red": "u1", "green": "u1", "blue": "u1"}


class _Element:
    def __init__(self, name, count, offset):
        self.name = name
        self.count = count
        self.offset = offset  # header byte offset of the element line
        self.props = []       # (name, numpy type char) or ("list", name)


def _parse_header(f):
    offset = 0

    def readline():
        nonlocal offset
        line_offset = offset
        raw = f.readline()
        if not raw:
            raise PlyParseError("unexpected end of header", line_offset)
        offset += len(raw)
        return raw.decode("ascii", errors="replace").strip(), line_offset

    line, off = readline()
    if line != "ply":
        raise PlyParseError("not a PLY file (missing 'ply' magic)", off)
    fmt = None
    elements = []
    while True:
        line, off = readline()
        if line == "end_header":
            break
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        parts = line.split()
        if parts[0] == "format":
            if len(parts) != 3 or parts[2] != "1.0":
                raise PlyParseError(f"unsupported format line: {line!r}", off)
            if parts[1] not in ("ascii", "binary_little_endian"):
                raise PlyParseError(f"unsupported PLY format {parts[1]!r}", off)
            fmt = parts[1]
        elif parts[0] == "element":
            if len(parts) != 3 or not parts[2].isdigit():
                raise PlyParseError(f"malformed element line: {line!r}", off)
            elements.append(_Element(parts[1], int(parts[2]), off))
        elif parts[0] == "property":
            if not elements:
                raise PlyParseError("property before any element", off)
            if parts[1] == "list":
                if len(parts) != 5:
                    raise PlyParseError(f"malformed list property: {line!r}", off)
                elements[-1].props.append(("list", parts[4]))
            else:
                if len(parts) != 3:
                    raise PlyParseError(f"malformed property line: {line!r}", off)
                t = _SCALAR_TYPES.get(parts[1])
                if t is None:
                    raise PlyParseError(f"unknown property type {parts[1]!r}", off)
                elements[-1].props.append((parts[2], t))
        else:
            raise PlyParseError(f"unrecognized header line: {line!r}", off)
    if fmt is None:
        raise PlyParseError("header has no format line", offset)
    return fmt, elements, offset


def _check_vertex_props(elem):
    names = {name: t for name, t in elem.props if name != "list"}
    for req, req_t in _REQUIRED.items():
        if req not in names:
            raise PlyParseError(f"vertex element missing property {req!r}", elem.offset)
        if names[req] != req_t:
            want = "32-bit float" if req_t == "f4" else "8-bit unsigned"
            raise PlyParseError(f"vertex property {req!r} must be {want}", elem.offset)
    if any(name == "list" for name, _ in elem.props):
        raise PlyParseError("list property in vertex element is unsupported", elem.offset)


def _load_ascii(f, elem, offset):
    cols = {name: i for i, (name, _) in enumerate(elem.props)}
    ncols = len(elem.props)
    positions = np.empty((elem.count, 3), dtype=np.float32)
    colors = np.empty((elem.count, 3), dtype=np.uint8)
    xyz = (cols["x"], cols["y"], cols["z"])
    rgb = (cols["red"], cols["green"], cols["blue"])
    for i in range(elem.count):
        line_offset = offset
        raw = f.readline()
        if not raw:
            raise PlyParseError(
                f"truncated payload: vertex {i} of {elem.count} missing", line_offset
            )
        offset += len(raw)
        toks = raw.split()
        if len(toks) < ncols:
            raise PlyParseError(
                f"vertex line has {len(toks)} values, expected {ncols}", line_offset
            )
        try:
            for a, c in enumerate(xyz):
                positions[i, a] = float(toks[c])
            for a, c in enumerate(rgb):
                val = int(toks[c])
                if not 0 <= val <= 255:
                    raise ValueError
                colors[i, a] = val
        except ValueError:
            raise PlyParseError(f"unparseable vertex line: {raw[:80]!r}", line_offset) from None
    return positions, colors, offset


def _skip_ascii(f, elem, offset):
    for i in range(elem.count):
        raw = f.readline()
        if not raw:
            raise PlyParseError(f"truncated element {elem.name!r}", offset)
        offset += len(raw)
    return offset


def _binary_dtype(elem):
    fields = []
    for i, (name, t) in enumerate(elem.props):
        fields.append((name if name != "list" else f"_list{i}", "<" + t))
    return np.dtype(fields)


def _load_binary(f, elem, offset):
    dt = _binary_dtype(elem)
    need = dt.itemsize * elem.count
    data = f.read(need)
    if len(data) < need:
        raise PlyParseError(
            f"truncated payload: got {len(data)} of {need} bytes "
            f"for element {elem.name!r}",
            offset + len(data),
        )
    rows = np.frombuffer(data, dtype=dt)
    positions = np.stack([rows["x"], rows["y"], rows["z"]], axis=1)
    colors = np.stack([rows["red"], rows["green"], rows["blue"]], axis=1)
    return positions, colors, offset + need


def load_ply(path) -> PointCloud:
    """Load a colored point cloud; raises PlyParseError with a byte offset."""
    with open(path, "rb") as f:
        fmt, elements, offset = _parse_header(f)
        vertex = next((e for e in elements if e.name == "vertex"), None)
        if vertex is None:
            raise PlyParseError("no vertex element in header", offset)
        if vertex.count == 0:
            raise PlyParseError("empty cloud", vertex.offset)
        _check_vertex_props(vertex)
        for elem in elements:
            if elem is vertex:
                break
            if fmt == "ascii":
                offset = _skip_ascii(f, elem, offset)
            else:
                if any(name == "list" for name, _ in elem.props):
                    raise PlyParseError(
                        f"cannot skip variable-size element {elem.name!r} "
                        "preceding vertex",
                        elem.offset,
                    )
                dt = _binary_dtype(elem)
                f.read(dt.itemsize * elem.count)
                offset += dt.itemsize * elem.count
        if fmt == "ascii":
            positions, colors, _ = _load_ascii(f, vertex, offset)
        else:
            positions, colors, _ = _load_binary(f, vertex, offset)
    return PointCloud(positions, colors)


def save_ply(cloud: PointCloud, path, binary: bool = True) -> None:
    """Write a cloud in the canonical x/y/z/red/green/blue layout."""
    fmt = "binary_little_endian" if binary else "ascii"
    header = (
        "ply\n"
        f"format {fmt} 1.0\n"
        f"element vertex {cloud.count}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        "end_header\n"
    )
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        if binary:
            dt = np.dtype(
                [("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
                 ("red", "u1"), ("green", "u1"), ("blue", "u1")]
            )
            rows = np.empty(cloud.count, dtype=dt)
            for i, name in enumerate(("x", "y", "z")):
                rows[name] = cloud.positions[:, i]
            for i, name in enumerate(("red", "green", "blue")):
                rows[name] = cloud.colors[:, i]
            f.write(rows.tobytes())
        else:
            for p, c in zip(cloud.positions, cloud.colors):
                f.write(
                    f"{p[0]} {p[1]} {p[2]} {c[0]} {c[1]} {c[2]}\n".encode("ascii")
                )
