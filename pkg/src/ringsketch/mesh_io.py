"""Triangle mesh loading, normalization, and reorientation.

Meshes enter the pipeline as ASCII Wavefront OBJ files (``v``/``f``
directives only; anything else is ignored). Before rendering they are
recentered on the origin and uniformly scaled so the largest bounding-box
extent is exactly 2, i.e. the mesh fits a 2x2x2 box around the origin.
Axis fixes for misaligned objects are expressed as explicit rotations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateMeshError, MeshError, ObjParseError


@dataclass(frozen=True)
class Mesh:
    """Indexed triangle mesh.

    vertices: (n, 3) float64 positions, n >= 3, all finite.
    triangles: (m, 3) int32 vertex indices, all < n.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    id: str = ""

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=np.float64)
        tris = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise MeshError(f"vertices must be (n, 3), got {verts.shape}")
        if verts.shape[0] < 3:
            raise MeshError(f"mesh needs at least 3 vertices, got {verts.shape[0]}")
        if not np.isfinite(verts).all():
            raise MeshError("vertex coordinates contain NaN/Inf")
        if tris.size and (tris.min() < 0 or tris.max() >= verts.shape[0]):
            raise MeshError("triangle index out of range")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]

    @property
    def triangle_count(self) -> int:
        return self.triangles.shape[0]


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box with componentwise min <= max."""

    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.min, dtype=np.float64).reshape(3)
        hi = np.asarray(self.max, dtype=np.float64).reshape(3)
        if (lo > hi).any():
            raise MeshError("Aabb min exceeds max")
        object.__setattr__(self, "min", lo)
        object.__setattr__(self, "max", hi)

    @property
    def center(self) -> np.ndarray:
        return (self.min + self.max) / 2.0

    @property
    def extents(self) -> np.ndarray:
        return self.max - self.min


def parse_obj(data, mesh_id: str = "") -> Mesh:
    """Parse an ASCII Wavefront OBJ byte string into a Mesh.

    Supported subset: ``v x y z`` vertices and ``f i j k ...`` faces with
    1-based indices. Faces with more than three vertices are
    fan-triangulated as (v0, vi, vi+1). Vertex entries may carry extra
    ``f i/t/n`` fields; only the vertex index is used. All other
    directives (vt, vn, usemtl, o, g, s, comments, ...) are ignored.

    Raises ObjParseError with the offending line number on malformed
    input, MeshError when a face references a missing vertex.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("ascii")
        except UnicodeDecodeError as exc:
            raise ObjParseError(f"not ASCII: {exc}") from None
    else:
        text = data

    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, int, int]] = []
    face_lines: list[int] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ObjParseError("vertex needs 3 coordinates", line=lineno)
            try:
                x, y, z = (float(parts[i]) for i in (1, 2, 3))
            except ValueError:
                raise ObjParseError(f"bad vertex coordinate in {line!r}", line=lineno) from None
            if not all(np.isfinite((x, y, z))):
                raise ObjParseError("non-finite vertex coordinate", line=lineno)
            vertices.append((x, y, z))
        elif tag == "f":
            if len(parts) < 4:
                raise ObjParseError("face needs at least 3 vertices", line=lineno)
            idx = []
            for tok in parts[1:]:
                head = tok.split("/", 1)[0]
                try:
                    i = int(head)
                except ValueError:
                    raise ObjParseError(f"bad face index {tok!r}", line=lineno) from None
                if i <= 0:
                    raise ObjParseError(f"face index must be positive 1-based, got {i}", line=lineno)
                idx.append(i - 1)
            for k in range(1, len(idx) - 1):
                faces.append((idx[0], idx[k], idx[k + 1]))
                face_lines.append(lineno)
        # every other directive is silently ignored

    if len(vertices) < 3:
        raise ObjParseError(f"only {len(vertices)} vertices parsed, need at least 3")
    nverts = len(vertices)
    for tri, lineno in zip(faces, face_lines):
        if max(tri) >= nverts:
            raise MeshError(f"line {lineno}: face index {max(tri) + 1} exceeds vertex count {nverts}")

    return Mesh(np.array(vertices, dtype=np.float64),
                np.array(faces, dtype=np.int32).reshape(-1, 3), id=mesh_id)


def load_obj(path, mesh_id: str | None = None) -> Mesh:
    """Read an OBJ file from disk; mesh id defaults to the file stem."""
    from pathlib import Path

    p = Path(path)
    if mesh_id is None:
        mesh_id = p.stem
    return parse_obj(p.read_bytes(), mesh_id=mesh_id)


def serialize_obj(mesh: Mesh) -> bytes:
    """Serialize a mesh back to the v/f OBJ subset (round-trip safe)."""
    lines = []
    for x, y, z in mesh.vertices:
        lines.append("v %.17g %.17g %.17g" % (x, y, z))
    for a, b, c in mesh.triangles:
        lines.append(f"f {a + 1} {b + 1} {c + 1}")
    return ("\n".join(lines) + "\n").encode("ascii")


def save_obj(mesh: Mesh, path) -> None:
    from pathlib import Path

    Path(path).write_bytes(serialize_obj(mesh))


def bounding_box(mesh: Mesh) -> Aabb:
    """Componentwise min/max over all vertices."""
    if mesh.vertex_count == 0:
        raise MeshError("cannot compute bounding box of empty mesh")
    return Aabb(mesh.vertices.min(axis=0), mesh.vertices.max(axis=0))


def normalize_to_box(mesh: Mesh) -> Mesh:
    """Center the mesh on the origin and scale it into a 2x2x2 box.

    The bounding-box center moves to the origin, then all vertices are
    scaled by 2 / max(extent_x, extent_y, extent_z) so the largest extent
    becomes exactly 2 while aspect ratios are preserved.
    """
    box = bounding_box(mesh)
    longest = float(box.extents.max())
    if longest <= 0.0:
        raise DegenerateMeshError("mesh has zero extent along every axis")
    scale = 2.0 / longest
    verts = (mesh.vertices - box.center) * scale
    return replace(mesh, vertices=verts)


_AXES = {"X": 0, "Y": 1, "Z": 2}


def rotation_matrix(axis: str, degrees: float) -> np.ndarray:
    """Right-handed rotation matrix about a coordinate axis."""
    if axis.upper() not in _AXES:
        raise ValueError(f"axis must be one of X, Y, Z, got {axis!r}")
    if not np.isfinite(degrees):
        raise ValueError("rotation angle must be finite")
    t = np.deg2rad(degrees)
    c, s = np.cos(t), np.sin(t)
    if axis.upper() == "X":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=np.float64)
    if axis.upper() == "Y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=np.float64)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)


def rotate_about_axis(mesh: Mesh, axis: str, degrees: float) -> Mesh:
    """Rotate every vertex about the given axis through the origin."""
    rot = rotation_matrix(axis, degrees)
    return replace(mesh, vertices=mesh.vertices @ rot.T)


def apply_reorientation(mesh: Mesh, rotations) -> Mesh:
    """Apply a list of (axis, degrees) fixes, e.g. [("X", 90.0)]."""
    for axis, degrees in rotations:
        mesh = rotate_about_axis(mesh, axis, float(degrees))
    return mesh
