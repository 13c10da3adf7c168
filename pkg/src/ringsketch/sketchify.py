"""Turn rendered views into sketch-like binary images, plus the
randomized augmentations used to build training queries.

Edge extraction is implemented from first principles (separable
Gaussian blur, Sobel gradients, non-maximum suppression with double
threshold + hysteresis; and a 3x3 Laplacian with absolute threshold).
All randomized operations take an explicit numpy Generator so a
(inputs, seed) pair is always bit-reproducible.

Polarity convention: edge maps produced here are white strokes (255) on
black. Hand-drawn sketches arrive as dark strokes on light paper, which
is what crop_to_content expects; pipelines invert edge maps before
cropping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, EmptySketchError
from .render import RingSet, ViewImage
from .validation import check_binary_image, check_grayscale_image


@dataclass(frozen=True)
class SketchParams:
    method: str = "canny"
    canny_low: float = 50.0
    canny_high: float = 150.0
    gaussian_sigma: float = 1.4
    laplacian_threshold: float = 10.0
    dilation_radius: int = 1

    def __post_init__(self):
        if self.method not in ("canny", "laplacian"):
            raise ValueError(f"method must be canny or laplacian, got {self.method!r}")
        if not (0 <= self.canny_low < self.canny_high):
            raise ValueError("need 0 <= canny_low < canny_high")
        if self.gaussian_sigma < 0 or self.laplacian_threshold < 0 or self.dilation_radius < 0:
            raise ValueError("thresholds and radii must be >= 0")


@dataclass(frozen=True)
class AugmentParams:
    ring_probs: tuple = (0.2, 0.6, 0.2)
    edge_removal_fraction: float = 0.2
    flip_prob: float = 0.5
    rotation_range: float = 15.0
    queries_per_object: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        if abs(sum(self.ring_probs) - 1.0) > 1e-9:
            raise ValueError("ring_probs must sum to 1")
        if not 0.0 <= self.edge_removal_fraction <= 1.0:
            raise ValueError("edge_removal_fraction must be in [0, 1]")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ValueError("flip_prob must be in [0, 1]")
        if self.queries_per_object < 1:
            raise ValueError("queries_per_object must be >= 1")


# ---------------------------------------------------------------------------
# convolution building blocks

def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = max(int(np.ceil(3.0 * sigma)), 1)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge-replicated borders (float64 out)."""
    f = np.asarray(img, dtype=np.float64)
    if sigma <= 0:
        return f.copy()
    k = _gaussian_kernel(sigma)
    r = len(k) // 2
    p = np.pad(f, ((0, 0), (r, r)), mode="edge")
    out = np.zeros_like(f)
    for i, w in enumerate(k):
        out += w * p[:, i:i + f.shape[1]]
    p = np.pad(out, ((r, r), (0, 0)), mode="edge")
    out2 = np.zeros_like(f)
    for i, w in enumerate(k):
        out2 += w * p[i:i + f.shape[0], :]
    return out2


def sobel_gradients(img: np.ndarray):
    """3x3 Sobel gradients (gx, gy) with edge-replicated borders; y is down."""
    f = np.asarray(img, dtype=np.float64)
    p = np.pad(f, 1, mode="edge")
    tl, tc, tr = p[:-2, :-2], p[:-2, 1:-1], p[:-2, 2:]
    ml, mr = p[1:-1, :-2], p[1:-1, 2:]
    bl, bc, br = p[2:, :-2], p[2:, 1:-1], p[2:, 2:]
    gx = (tr + 2 * mr + br) - (tl + 2 * ml + bl)
    gy = (bl + 2 * bc + br) - (tl + 2 * tc + tr)
    return gx, gy


# ---------------------------------------------------------------------------
# edge detectors

def canny(img, params: SketchParams = SketchParams()) -> ViewImage:
    """Classic multi-stage edge detector; returns 255-on-0 edges.

    Stages: Gaussian blur -> Sobel -> non-maximum suppression along the
    quantized gradient direction -> double threshold -> hysteresis
    (weak pixels survive only when 8-connected to a strong pixel).
    """
    gray = check_grayscale_image(_pixels_of(img), "canny input")
    blurred = gaussian_blur(gray, params.gaussian_sigma)
    gx, gy = sobel_gradients(blurred)
    mag = np.hypot(gx, gy)

    # quantize gradient direction to 0/45/90/135 degrees
    angle = np.rad2deg(np.arctan2(gy, gx)) % 180.0
    dbin = np.zeros(angle.shape, dtype=np.int8)
    dbin[(angle >= 22.5) & (angle < 67.5)] = 1
    dbin[(angle >= 67.5) & (angle < 112.5)] = 2
    dbin[(angle >= 112.5) & (angle < 157.5)] = 3
    offsets = {0: (0, 1), 1: (1, 1), 2: (1, 0), 3: (1, -1)}  # (dy, dx) along gradient

    padded = np.pad(mag, 1, mode="constant")
    nms = np.zeros_like(mag)
    h, w = mag.shape
    for b, (dy, dx) in offsets.items():
        sel = dbin == b
        ahead = padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        behind = padded[1 - dy:1 - dy + h, 1 - dx:1 - dx + w]
        # strict on one side, ties allowed on the other, so a two-pixel
        # plateau (symmetric blur around a step) keeps exactly one line
        keep = sel & (mag > behind) & (mag >= ahead)
        nms[keep] = mag[keep]

    strong = nms >= params.canny_high
    weak = nms >= params.canny_low
    edges = strong.copy()
    while True:
        grown = _dilate_bool(edges, 1) & weak
        if (grown == edges).all():
            break
        edges = grown
    return ViewImage(np.where(edges, 255, 0).astype(np.uint8), kind="edge")


def laplacian_edge(img, params: SketchParams = SketchParams()) -> ViewImage:
    """3x3 Laplacian (center 4, cross -1), absolute response thresholded."""
    gray = check_grayscale_image(_pixels_of(img), "laplacian input").astype(np.float64)
    p = np.pad(gray, 1, mode="edge")
    resp = 4.0 * gray - p[:-2, 1:-1] - p[2:, 1:-1] - p[1:-1, :-2] - p[1:-1, 2:]
    edges = np.abs(resp) >= params.laplacian_threshold
    return ViewImage(np.where(edges, 255, 0).astype(np.uint8), kind="edge")


def sketchify_view(img, params: SketchParams = SketchParams()) -> ViewImage:
    fn = canny if params.method == "canny" else laplacian_edge
    return fn(img, params)


# ---------------------------------------------------------------------------
# binary morphology and pixel ops

def _dilate_bool(mask: np.ndarray, radius: int) -> np.ndarray:
    out = mask.copy()
    for _ in range(radius):
        p = np.pad(out, 1, mode="constant")
        acc = np.zeros_like(out)
        h, w = out.shape
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                acc |= p[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
        out = acc
    return out


def dilate(img, radius: int) -> ViewImage:
    """Binary dilation with a (2*radius+1)^2 square structuring element."""
    arr = check_binary_image(_pixels_of(img), "dilate input")
    if radius < 0:
        raise ValueError("radius must be >= 0")
    out = _dilate_bool(arr == 255, radius)
    return ViewImage(np.where(out, 255, 0).astype(np.uint8), kind=_kind_of(img, "edge"))


def invert(img) -> ViewImage:
    """255 - value, preserving shape."""
    arr = check_grayscale_image(_pixels_of(img), "invert input")
    return ViewImage((255 - arr).astype(np.uint8), kind=_kind_of(img, "shaded"))


def crop_to_content(img, out_size: int = 224, pad: int = 5) -> ViewImage:
    """Tight square crop of sketch content, resized onto a padded canvas.

    Input is dark strokes on a light background; pixels below 128 count
    as content. The content bounding box is expanded to a square
    (centered), nearest-neighbor resized to out_size - 2*pad, and placed
    in the middle of an out_size canvas. Output is a binary content
    mask: strokes 255 on background 0.
    """
    arr = check_grayscale_image(_pixels_of(img), "crop input")
    if out_size <= 2 * pad:
        raise ValueError("out_size must exceed 2*pad")
    content = arr < 128
    if not content.any():
        raise EmptySketchError("empty sketch")
    rows = np.nonzero(content.any(axis=1))[0]
    cols = np.nonzero(content.any(axis=0))[0]
    rlo, rhi = int(rows[0]), int(rows[-1])
    clo, chi = int(cols[0]), int(cols[-1])
    side = max(rhi - rlo + 1, chi - clo + 1)
    r0 = (rlo + rhi + 1 - side) // 2
    c0 = (clo + chi + 1 - side) // 2

    square = np.zeros((side, side), dtype=bool)
    src_r = slice(max(r0, 0), min(r0 + side, arr.shape[0]))
    src_c = slice(max(c0, 0), min(c0 + side, arr.shape[1]))
    square[src_r.start - r0:src_r.stop - r0, src_c.start - c0:src_c.stop - c0] = \
        content[src_r, src_c]

    inner = out_size - 2 * pad
    idx = np.minimum((np.arange(inner) * side) // inner, side - 1)
    resized = square[np.ix_(idx, idx)]
    canvas = np.zeros((out_size, out_size), dtype=np.uint8)
    canvas[pad:pad + inner, pad:pad + inner] = np.where(resized, 255, 0)
    return ViewImage(canvas, kind="sketch")


def flip_horizontal(img) -> ViewImage:
    arr = check_grayscale_image(_pixels_of(img), "flip input")
    return ViewImage(arr[:, ::-1].copy(), kind=_kind_of(img, "shaded"))


def rotate_nn(img, degrees: float, fill: int = 0) -> ViewImage:
    """Rotate about the image center with nearest-neighbor sampling.

    Positive angles turn the content clockwise on screen (image rows
    grow downward). Pixels mapped from outside the frame get `fill`.
    """
    arr = check_grayscale_image(_pixels_of(img), "rotate input")
    h, w = arr.shape
    t = np.deg2rad(degrees)
    c, s = np.cos(t), np.sin(t)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = np.mgrid[0:h, 0:w]
    dy = ys - cy
    dx = xs - cx
    # inverse map: rotate destination coords by -degrees
    src_x = c * dx + s * dy + cx
    src_y = -s * dx + c * dy + cy
    sx = np.rint(src_x).astype(int)
    sy = np.rint(src_y).astype(int)
    valid = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out = np.full_like(arr, fill)
    out[valid] = arr[sy[valid], sx[valid]]
    return ViewImage(out, kind=_kind_of(img, "shaded"))


# ---------------------------------------------------------------------------
# stroke-level edge removal

def _strokes(mask: np.ndarray):
    """8-connected components as lists of (y, x) in BFS traversal order."""
    h, w = mask.shape
    seen = np.zeros_like(mask, dtype=bool)
    strokes = []
    for sy, sx in zip(*np.nonzero(mask)):
        if seen[sy, sx]:
            continue
        queue = [(int(sy), int(sx))]
        seen[sy, sx] = True
        head = 0
        while head < len(queue):
            y, x = queue[head]
            head += 1
            for dy in (-1, 0, 1):
                for dx in (-1, 0, 1):
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
        strokes.append(queue)
    return strokes


def random_edge_removal(img, fraction: float, rng: np.random.Generator) -> ViewImage:
    """Erase random strokes (and stroke segments) from a binary edge map.

    Edge pixels are grouped into 8-connected strokes by traversal; whole
    strokes are dropped in random order, and the last stroke considered
    is only partially erased (a contiguous run of its traversal) so the
    removed count lands exactly on round(fraction * edge_pixels). The
    output edge set is always a subset of the input.
    """
    arr = check_binary_image(_pixels_of(img), "edge removal input")
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be in [0, 1]")
    mask = arr == 255
    total = int(mask.sum())
    target = int(round(fraction * total))
    if target == 0:
        return ViewImage(arr.copy(), kind=_kind_of(img, "edge"))

    out = mask.copy()
    strokes = _strokes(mask)
    order = rng.permutation(len(strokes))
    removed = 0
    for si in order:
        stroke = strokes[si]
        need = target - removed
        if need <= 0:
            break
        if len(stroke) <= need:
            for y, x in stroke:
                out[y, x] = False
            removed += len(stroke)
        else:
            start = int(rng.integers(0, len(stroke) - need + 1))
            for y, x in stroke[start:start + need]:
                out[y, x] = False
            removed += need
    return ViewImage(np.where(out, 255, 0).astype(np.uint8), kind=_kind_of(img, "edge"))


# ---------------------------------------------------------------------------
# training-query generation

RING_CHOICES = (2, 3, 4)


@dataclass(frozen=True)
class AugmentPlan:
    """The random decisions behind one query (kept for the manifest)."""

    ring: int
    view_index: int
    method: str
    flip: bool
    rotation_degrees: float


def sample_augment_plan(params: AugmentParams, rng: np.random.Generator,
                        views_per_ring: int = 12) -> AugmentPlan:
    """Draw one query's augmentation decisions from the generator."""
    ring = int(rng.choice(RING_CHOICES, p=params.ring_probs))
    view_idx = int(rng.integers(0, views_per_ring))
    method = "canny" if rng.random() < 0.5 else "laplacian"
    flip = bool(rng.random() < params.flip_prob)
    angle = float(rng.uniform(-params.rotation_range, params.rotation_range))
    return AugmentPlan(ring, view_idx, method, flip, angle)


def execute_augment_plan(rings: RingSet, plan: AugmentPlan, params: AugmentParams,
                         rng: np.random.Generator,
                         sketch_params: SketchParams = SketchParams()) -> ViewImage:
    """Apply a plan to one object's views; rng drives stroke removal."""
    _, view = rings.rings[plan.ring][plan.view_index]
    edge = sketchify_view(view.pixels, _with_method(sketch_params, plan.method))
    if plan.flip:
        edge = flip_horizontal(edge)
    edge = rotate_nn(edge, plan.rotation_degrees)
    edge = random_edge_removal(edge, params.edge_removal_fraction, rng)
    return ViewImage(edge.pixels, kind="sketch")


def generate_training_queries(rings: RingSet, params: AugmentParams,
                              rng: np.random.Generator,
                              sketch_params: SketchParams = SketchParams(),
                              with_plans: bool = False):
    """Randomized sketch queries for one object's RingSet.

    Per query: pick a ring by ring_probs, a view uniformly within it,
    extract edges with a coin-flip between the two detectors, then apply
    random horizontal flip, small rotation, and stroke removal. Returns
    a list of (ViewImage, object_id), or (ViewImage, object_id, plan)
    triples when with_plans is set.
    """
    for k in RING_CHOICES:
        if k not in rings.rings:
            raise DataError(f"RingSet for {rings.object_id!r} is missing ring {k}")
    views_per_ring = len(rings.rings[RING_CHOICES[0]])
    queries = []
    for _ in range(params.queries_per_object):
        plan = sample_augment_plan(params, rng, views_per_ring)
        img = execute_augment_plan(rings, plan, params, rng, sketch_params)
        queries.append((img, rings.object_id, plan) if with_plans else (img, rings.object_id))
    return queries


def query_variant_set(img, rotation_range: float = 15.0) -> list:
    """Deterministic flip x rotation expansion of one sketch query.

    Ten variants per query: {as-is, mirrored} x rotations {0,
    +-rotation_range/2, +-rotation_range}. Multiplying a base query set
    by these variants is the cheap way to grow a small corpus of sketches
    into a training-sized one.
    """
    if rotation_range <= 0:
        raise ValueError(f"rotation_range must be positive, got {rotation_range}")
    angles = (0.0, -rotation_range, -rotation_range / 2.0,
              rotation_range / 2.0, rotation_range)
    variants = []
    for mirrored in (False, True):
        base = flip_horizontal(img) if mirrored else img
        for angle in angles:
            variants.append(rotate_nn(base, angle))
    return variants


def _with_method(params: SketchParams, method: str) -> SketchParams:
    from dataclasses import replace

    return params if params.method == method else replace(params, method=method)


def _pixels_of(img):
    return img.pixels if isinstance(img, ViewImage) else img


def _kind_of(img, default):
    return img.kind if isinstance(img, ViewImage) else default
