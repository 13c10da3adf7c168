"""Procedural test meshes: primitive solids and a small creature corpus.

The corpus exists so the full pipeline can be exercised end to end
without any external data: twenty low-poly "creatures" composed from
spheres, boxes, cylinders and cones, each with deliberately different
proportions so their silhouettes are easy to tell apart. Every mesh is
a deterministic function of its id.
"""

from __future__ import annotations

import numpy as np

from .mesh_io import Mesh, rotation_matrix
from .seeding import rng_for


def _mesh(verts, tris, mesh_id=""):
    return Mesh(np.asarray(verts, dtype=np.float64),
                np.asarray(tris, dtype=np.int32), id=mesh_id)


def box(size=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)) -> Mesh:
    """Axis-aligned box; size gives full extents."""
    sx, sy, sz = (s / 2.0 for s in size)
    cx, cy, cz = center
    corners = np.array([[x, y, z] for x in (-sx, sx) for y in (-sy, sy) for z in (-sz, sz)])
    verts = corners + np.array([cx, cy, cz])
    # two triangles per face, outward-wound
    quads = [
        (0, 1, 3, 2),  # -x
        (4, 6, 7, 5),  # +x
        (0, 4, 5, 1),  # -y
        (2, 3, 7, 6),  # +y
        (0, 2, 6, 4),  # -z
        (1, 5, 7, 3),  # +z
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return _mesh(verts, tris)


def uv_sphere(radius=1.0, center=(0.0, 0.0, 0.0), segments=24, stacks=16) -> Mesh:
    """Latitude/longitude sphere with pole fans."""
    if segments < 3 or stacks < 2:
        raise ValueError("need segments >= 3 and stacks >= 2")
    cx, cy, cz = center
    verts = [(cx, cy, cz - radius)]
    for i in range(1, stacks):
        phi = np.pi * i / stacks  # polar angle from -z pole
        z = -np.cos(phi)
        r = np.sin(phi)
        for j in range(segments):
            a = 2.0 * np.pi * j / segments
            verts.append((cx + radius * r * np.cos(a),
                          cy + radius * r * np.sin(a),
                          cz + radius * z))
    verts.append((cx, cy, cz + radius))
    top = len(verts) - 1
    tris = []

    def ring_start(i):  # i in 1..stacks-1
        return 1 + (i - 1) * segments

    for j in range(segments):
        tris.append((0, ring_start(1) + (j + 1) % segments, ring_start(1) + j))
    for i in range(1, stacks - 1):
        a0, b0 = ring_start(i), ring_start(i + 1)
        for j in range(segments):
            jn = (j + 1) % segments
            tris.append((a0 + j, a0 + jn, b0 + jn))
            tris.append((a0 + j, b0 + jn, b0 + j))
    for j in range(segments):
        a0 = ring_start(stacks - 1)
        tris.append((top, a0 + j, a0 + (j + 1) % segments))
    return _mesh(verts, tris)


def ellipsoid(radii=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0), segments=16, stacks=10) -> Mesh:
    sphere = uv_sphere(1.0, (0, 0, 0), segments, stacks)
    verts = sphere.vertices * np.asarray(radii, dtype=np.float64) + np.asarray(center)
    return _mesh(verts, sphere.triangles)


def cylinder(radius=0.5, height=1.0, center=(0.0, 0.0, 0.0), segments=12) -> Mesh:
    """Capped cylinder along +Z, centered on `center`."""
    cx, cy, cz = center
    h = height / 2.0
    verts = []
    for z in (-h, h):
        for j in range(segments):
            a = 2.0 * np.pi * j / segments
            verts.append((cx + radius * np.cos(a), cy + radius * np.sin(a), cz + z))
    verts.append((cx, cy, cz - h))
    verts.append((cx, cy, cz + h))
    bot_c, top_c = len(verts) - 2, len(verts) - 1
    tris = []
    for j in range(segments):
        jn = (j + 1) % segments
        lo, lon = j, jn
        hi, hin = segments + j, segments + jn
        tris.append((lo, lon, hin))
        tris.append((lo, hin, hi))
        tris.append((bot_c, lon, lo))
        tris.append((top_c, hi, hin))
    return _mesh(verts, tris)


def cone(radius=0.5, height=1.0, center=(0.0, 0.0, 0.0), segments=12) -> Mesh:
    """Cone along +Z: base disc at center-z minus height/2, apex above."""
    cx, cy, cz = center
    h = height / 2.0
    verts = []
    for j in range(segments):
        a = 2.0 * np.pi * j / segments
        verts.append((cx + radius * np.cos(a), cy + radius * np.sin(a), cz - h))
    verts.append((cx, cy, cz - h))
    verts.append((cx, cy, cz + h))
    base_c, apex = segments, segments + 1
    tris = []
    for j in range(segments):
        jn = (j + 1) % segments
        tris.append((j, jn, apex))
        tris.append((base_c, jn, j))
    return _mesh(verts, tris)


def transform(mesh: Mesh, scale=None, rotate=None, translate=None) -> Mesh:
    """Scale (per-axis), then rotate [(axis, degrees), ...], then translate."""
    verts = mesh.vertices
    if scale is not None:
        verts = verts * np.asarray(scale, dtype=np.float64)
    if rotate is not None:
        for axis, deg in rotate:
            verts = verts @ rotation_matrix(axis, deg).T
    if translate is not None:
        verts = verts + np.asarray(translate, dtype=np.float64)
    return _mesh(verts, mesh.triangles, mesh.id)


def merge(meshes, mesh_id="") -> Mesh:
    """Concatenate meshes into one, reindexing triangles."""
    verts = []
    tris = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        tris.append(m.triangles + offset)
        offset += m.vertex_count
    return _mesh(np.vstack(verts), np.vstack(tris), mesh_id)


# ---------------------------------------------------------------------------
# creature corpus

def _spread(rng, variant, lo, hi):
    """Pick from [lo, hi) inside the quartile selected by `variant`.

    Different variants of one family land in different quartiles of the
    range, so their proportions are forced apart instead of hoping the
    jitter spreads them.
    """
    u = (variant % 4 + rng.uniform(0.2, 0.8)) / 4.0
    return lo + (hi - lo) * u


def _quadruped(rng, variant, mesh_id):
    body_len = _spread(rng, variant, 1.2, 2.6)
    leg_len = _spread(rng, 3 - variant, 0.5, 1.3)  # long bodies get short legs
    body_h = rng.uniform(0.5, 0.8)
    head_r = _spread(rng, variant, 0.25, 0.55)
    leg_r = 0.06 + 0.03 * (variant % 4)
    parts = [ellipsoid((body_len / 2, body_h * 0.45, body_h / 2), (0, 0, leg_len), 12, 8)]
    parts.append(uv_sphere(head_r, (body_len / 2 + head_r * 0.7, 0, leg_len + body_h * 0.5), 10, 7))
    for sx in (-1, 1):
        for sy in (-1, 1):
            x = sx * body_len * 0.35
            y = sy * body_h * 0.3
            parts.append(cylinder(leg_r, leg_len, (x, y, leg_len / 2), 8))
    tail = cone(0.1, body_len * 0.5, (0, 0, 0), 8)
    parts.append(transform(tail, rotate=[("Y", -100)],
                           translate=(-body_len / 2 - 0.2, 0, leg_len + body_h * 0.2)))
    return merge(parts, mesh_id)


def _biped(rng, variant, mesh_id):
    body_r = _spread(rng, variant, 0.4, 0.9)
    neck = _spread(rng, 3 - variant, 0.15, 1.3)  # slender birds get long necks
    leg_len = _spread(rng, variant, 0.7, 1.5)
    beak_len = 0.25 + 0.15 * (variant % 4)
    parts = [ellipsoid((body_r, body_r * 0.8, body_r * 1.1), (0, 0, leg_len + body_r), 12, 8)]
    head_z = leg_len + 2 * body_r + neck
    parts.append(uv_sphere(body_r * 0.45, (body_r * 0.3, 0, head_z), 10, 7))
    beak = cone(0.08, beak_len, (0, 0, 0), 8)
    parts.append(transform(beak, rotate=[("Y", 90)], translate=(body_r * 0.8, 0, head_z)))
    for sy in (-1, 1):
        parts.append(cylinder(0.06, leg_len, (0, sy * body_r * 0.4, leg_len / 2), 8))
    return merge(parts, mesh_id)


def _crawler(rng, variant, mesh_id):
    n = 4 + 2 * (variant % 4) + int(rng.integers(0, 2))  # 4-5 / 6-7 / 8-9 / 10-11 segments
    amp = _spread(rng, variant, 0.1, 0.8)
    r0 = _spread(rng, 3 - variant, 0.22, 0.42)
    taper = rng.uniform(0.4, 0.7)
    parts = []
    for i in range(n):
        x = i * r0 * 1.4
        y = amp * np.sin(i * 1.1)
        r = r0 * (1.0 - taper * i / max(n - 1, 1))
        parts.append(uv_sphere(max(r, 0.08), (x, y, r0), 8, 6))
    return merge(parts, mesh_id)


def _swimmer(rng, variant, mesh_id):
    body_len = _spread(rng, variant, 1.3, 2.6)
    body_h = _spread(rng, 3 - variant, 0.4, 1.0)  # long fish are slender
    fin_h = _spread(rng, variant, 0.3, 0.9)
    parts = [ellipsoid((body_len / 2, 0.18, body_h / 2), (0, 0, 0), 12, 8)]
    tail = cone(body_h * 0.4, 0.7, (0, 0, 0), 8)
    parts.append(transform(tail, rotate=[("Y", -90)], translate=(-body_len / 2 - 0.25, 0, 0)))
    fin = cone(0.25, fin_h, (0, 0, 0), 6)
    parts.append(transform(fin, translate=(body_len * 0.1, 0, body_h / 2 + fin_h * 0.3)))
    return merge(parts, mesh_id)


def _domed(rng, variant, mesh_id):
    shell_r = _spread(rng, variant, 0.8, 1.4)
    squash = _spread(rng, 3 - variant, 0.25, 0.65)  # wide shells sit flatter
    leg_len = _spread(rng, variant, 0.15, 0.6)
    head_r = 0.15 + 0.06 * (variant % 4)
    parts = [ellipsoid((shell_r, shell_r * 0.85, shell_r * squash), (0, 0, leg_len + shell_r * squash * 0.6), 12, 8)]
    parts.append(uv_sphere(head_r, (shell_r + 0.15, 0, leg_len + 0.15), 8, 6))
    for sx in (-1, 1):
        for sy in (-1, 1):
            parts.append(cylinder(0.12, leg_len, (sx * shell_r * 0.5, sy * shell_r * 0.5, leg_len / 2), 8))
    return merge(parts, mesh_id)


_FAMILIES = [_quadruped, _biped, _crawler, _swimmer, _domed]


def creature(index: int, master_seed: int = 0) -> Mesh:
    """Deterministic creature number `index` (id ``shapeNN``).

    index % 5 picks the family; index // 5 picks the proportion variant,
    so consecutive same-family creatures differ structurally.
    """
    mesh_id = f"shape{index:02d}"
    rng = rng_for(master_seed, mesh_id)
    variant = index // len(_FAMILIES)
    mesh = _FAMILIES[index % len(_FAMILIES)](rng, variant, mesh_id)
    if mesh.triangle_count >= 1000:
        raise AssertionError(f"{mesh_id} has {mesh.triangle_count} triangles; corpus budget is < 1000")
    return mesh


def synthetic_corpus(count: int = 20, master_seed: int = 0) -> list:
    """The standard corpus: `count` deterministic creatures."""
    return [creature(i, master_seed) for i in range(count)]
