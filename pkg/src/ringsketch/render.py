"""Deterministic software rasterizer for mesh view images.

Perspective look-at projection, per-triangle edge-function coverage at
pixel centers, a 1/z depth buffer, and flat shading with a headlight
(light co-located with the camera, intensity |n . view|). No backface
culling, no anti-aliasing, no GPU: every output is a pure function of
(mesh, pose, resolution, fov), so identical calls are bit-identical.

Shaded images use grey 128 for background; silhouettes are 255 on 0.
Both styles come from the same coverage pass, so the shaded foreground
set always equals the silhouette foreground set exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import (
    DEFAULT_DISTANCE,
    RING_COUNT,
    VIEWS_PER_RING,
    CameraPose,
    dh_camera_poses,
    ring_camera_poses,
    thp_camera_poses,
)
from .imgio import save_image
from .mesh_io import Mesh

BACKGROUND_GREY = 128
DEFAULT_RESOLUTION = 224
DEFAULT_FOV_DEGREES = 45.0
_NEAR = 1e-3


@dataclass(frozen=True)
class ViewImage:
    """One rendered view: row-major uint8 pixels plus a style tag."""

    pixels: np.ndarray
    kind: str = "shaded"

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        if px.ndim != 2:
            raise ValueError(f"pixels must be 2-D, got shape {px.shape}")
        if self.kind not in ("shaded", "silhouette", "edge", "sketch"):
            raise ValueError(f"unknown view kind {self.kind!r}")
        if self.kind in ("edge", "sketch", "silhouette"):
            vals = np.unique(px)
            if not np.isin(vals, (0, 255)).all():
                raise ValueError(f"{self.kind} images must be binary 0/255")
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class RingSet:
    """All rendered views of one object, grouped by ring index."""

    object_id: str
    rings: dict

    def __post_init__(self):
        counts = {len(v) for v in self.rings.values()}
        if len(counts) > 1:
            raise ValueError(f"rings have unequal view counts: {sorted(counts)}")

    def view_count(self) -> int:
        return sum(len(v) for v in self.rings.values())

    def images(self):
        """All images ordered by (ring_index, azimuth_index)."""
        out = []
        for k in sorted(self.rings):
            out.extend(img for _, img in self.rings[k])
        return out


@dataclass(frozen=True)
class RenderConfig:
    rings: tuple = (2, 3, 4)
    resolution: int = DEFAULT_RESOLUTION
    distance: float = DEFAULT_DISTANCE
    fov_degrees: float = DEFAULT_FOV_DEGREES
    style: str = "shaded"

    def __post_init__(self):
        if self.resolution < 16:
            raise ValueError(f"resolution must be >= 16, got {self.resolution}")
        if self.style not in ("shaded", "silhouette"):
            raise ValueError(f"style must be shaded or silhouette, got {self.style!r}")
        if self.distance <= 0:
            raise ValueError("camera distance must be positive")


def camera_basis(pose: CameraPose):
    """Right/up/forward orthonormal basis for a look-at camera."""
    fwd = pose.look_at - pose.position
    fwd = fwd / np.linalg.norm(fwd)
    right = np.cross(fwd, pose.up)
    right = right / np.linalg.norm(right)
    up = np.cross(right, fwd)
    return right, up, fwd


def project_vertices(vertices: np.ndarray, pose: CameraPose, resolution: int,
                     fov_degrees: float = DEFAULT_FOV_DEGREES):
    """Project world-space vertices to pixel coordinates.

    Returns (xy, z) where xy[:, 0] is the pixel x (column), xy[:, 1] the
    pixel y (row, y down), and z the camera-space depth (positive in
    front of the camera). The pixel grid spans [0, resolution] with
    pixel centers at half-integers.
    """
    right, up, fwd = camera_basis(pose)
    rel = vertices - pose.position
    cam = rel @ np.stack([right, up, fwd], axis=1)
    z = cam[:, 2]
    focal = 1.0 / np.tan(np.deg2rad(fov_degrees) / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ndc_x = focal * cam[:, 0] / z
        ndc_y = focal * cam[:, 1] / z
    half = resolution / 2.0
    xy = np.stack([(ndc_x + 1.0) * half, (1.0 - ndc_y) * half], axis=1)
    return xy, z


def rasterize(mesh: Mesh, pose: CameraPose, resolution: int,
              fov_degrees: float = DEFAULT_FOV_DEGREES):
    """Coverage mask and flat headlight shading for one view.

    Returns (covered, shade): covered is a bool (H, W) array marking
    pixels whose center falls inside a front-of-camera triangle, shade
    holds per-pixel |n . view| of the nearest such triangle in [0, 1].
    Degenerate (zero-area) and behind-camera triangles simply contribute
    nothing, so any mesh renders without error.
    """
    h = w = int(resolution)
    covered = np.zeros((h, w), dtype=bool)
    shade = np.zeros((h, w), dtype=np.float64)
    inv_depth = np.full((h, w), -np.inf)
    if mesh.triangle_count == 0:
        return covered, shade

    xy, z = project_vertices(mesh.vertices, pose, resolution, fov_degrees)
    tris = mesh.triangles
    v0w = mesh.vertices[tris[:, 0]]
    v1w = mesh.vertices[tris[:, 1]]
    v2w = mesh.vertices[tris[:, 2]]
    normals = np.cross(v1w - v0w, v2w - v0w)
    nlen = np.linalg.norm(normals, axis=1)
    centroids = (v0w + v1w + v2w) / 3.0
    views = pose.position - centroids
    vlen = np.linalg.norm(views, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        lambert = np.abs(np.einsum("ij,ij->i", normals, views)) / (nlen * vlen)
    lambert = np.nan_to_num(lambert, nan=0.0)

    ys = np.arange(h) + 0.5
    xs = np.arange(w) + 0.5
    for t in range(tris.shape[0]):
        i0, i1, i2 = tris[t]
        if z[i0] < _NEAR or z[i1] < _NEAR or z[i2] < _NEAR:
            continue
        p0, p1, p2 = xy[i0], xy[i1], xy[i2]
        area = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0])
        if area == 0.0:
            continue
        x_lo = max(int(np.floor(min(p0[0], p1[0], p2[0]) - 0.5)), 0)
        x_hi = min(int(np.ceil(max(p0[0], p1[0], p2[0]) + 0.5)), w)
        y_lo = max(int(np.floor(min(p0[1], p1[1], p2[1]) - 0.5)), 0)
        y_hi = min(int(np.ceil(max(p0[1], p1[1], p2[1]) + 0.5)), h)
        if x_lo >= x_hi or y_lo >= y_hi:
            continue
        px = xs[x_lo:x_hi][None, :]
        py = ys[y_lo:y_hi][:, None]
        w0 = (p2[0] - p1[0]) * (py - p1[1]) - (p2[1] - p1[1]) * (px - p1[0])
        w1 = (p0[0] - p2[0]) * (py - p2[1]) - (p0[1] - p2[1]) * (px - p2[0])
        w2 = (p1[0] - p0[0]) * (py - p0[1]) - (p1[1] - p0[1]) * (px - p0[0])
        if area > 0:
            inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
        else:
            inside = (w0 <= 0) & (w1 <= 0) & (w2 <= 0)
        if not inside.any():
            continue
        b0 = w0 / area
        b1 = w1 / area
        b2 = w2 / area
        inv_z = b0 / z[i0] + b1 / z[i1] + b2 / z[i2]
        window = (slice(y_lo, y_hi), slice(x_lo, x_hi))
        win = inside & (inv_z > inv_depth[window])
        if not win.any():
            continue
        inv_depth[window] = np.where(win, inv_z, inv_depth[window])
        covered[window] |= win
        shade[window] = np.where(win, lambert[t], shade[window])
    return covered, shade


def render_shaded(mesh: Mesh, pose: CameraPose, resolution: int = DEFAULT_RESOLUTION,
                  fov_degrees: float = DEFAULT_FOV_DEGREES) -> ViewImage:
    """Grey-background flat-shaded view of the mesh."""
    covered, shade = rasterize(mesh, pose, resolution, fov_degrees)
    vals = np.rint(shade * 255.0).astype(np.int32)
    # keep foreground distinguishable from the background grey so the
    # non-background pixel set always equals the silhouette
    vals[vals == BACKGROUND_GREY] = BACKGROUND_GREY - 1
    img = np.full(covered.shape, BACKGROUND_GREY, dtype=np.uint8)
    img[covered] = vals[covered].astype(np.uint8)
    return ViewImage(img, kind="shaded")


def render_silhouette(mesh: Mesh, pose: CameraPose, resolution: int = DEFAULT_RESOLUTION,
                      fov_degrees: float = DEFAULT_FOV_DEGREES) -> ViewImage:
    """Binary mask view: foreground 255, background 0."""
    covered, _ = rasterize(mesh, pose, resolution, fov_degrees)
    img = np.where(covered, 255, 0).astype(np.uint8)
    return ViewImage(img, kind="silhouette")


_RENDERERS = {"shaded": render_shaded, "silhouette": render_silhouette}


def render_view(mesh: Mesh, pose: CameraPose, resolution: int = DEFAULT_RESOLUTION,
                style: str = "shaded", fov_degrees: float = DEFAULT_FOV_DEGREES) -> ViewImage:
    return _RENDERERS[style](mesh, pose, resolution, fov_degrees)


def render_rings(mesh: Mesh, config: RenderConfig = RenderConfig()) -> RingSet:
    """Render the configured ring subset of the 7x12 layout."""
    rings: dict = {}
    for k in config.rings:
        entries = []
        for pose in ring_camera_poses(config.distance, rings=[k]):
            img = render_view(mesh, pose, config.resolution, config.style, config.fov_degrees)
            entries.append((pose, img))
        rings[int(k)] = entries
    return RingSet(object_id=mesh.id, rings=rings)


def render_poses(mesh: Mesh, poses, resolution: int = DEFAULT_RESOLUTION,
                 style: str = "shaded", fov_degrees: float = DEFAULT_FOV_DEGREES) -> RingSet:
    """Render an arbitrary pose list, grouping views by ring_index."""
    rings: dict = {}
    for pose in poses:
        img = render_view(mesh, pose, resolution, style, fov_degrees)
        rings.setdefault(pose.ring_index, []).append((pose, img))
    return RingSet(object_id=mesh.id, rings=rings)


def write_ring_set(ring_set: RingSet, root, ext: str = "png") -> list:
    """Write images to `<root>/<object_id>/ring<k>/view<j>.<ext>`."""
    from pathlib import Path

    written = []
    base = Path(root) / ring_set.object_id
    for k in sorted(ring_set.rings):
        for pose, img in ring_set.rings[k]:
            path = base / f"ring{k}" / f"view{pose.azimuth_index}.{ext}"
            save_image(img.pixels, path)
            written.append(path)
    return written
