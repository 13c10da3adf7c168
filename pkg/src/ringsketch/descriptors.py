"""Classical image descriptors and vector similarity.

Two fixed-length descriptors cover the non-learned retrieval paths: an
orientation-histogram descriptor (HOG: per-cell gradient histograms
with bilinear orientation voting and overlapping block normalization)
and a coarse 4x4 mass-distribution grid. Cosine similarity and L2
distance are the two comparison functions used everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_grayscale_image, check_vector

DESCRIPTOR_TAGS = ("hog", "grid", "embed")


@dataclass(frozen=True)
class FeatureVector:
    """A descriptor output: flat float64 values plus the descriptor tag."""

    values: np.ndarray
    tag: str

    def __post_init__(self):
        vals = check_vector(self.values, "feature values")
        if self.tag not in DESCRIPTOR_TAGS:
            raise ValueError(f"tag must be one of {DESCRIPTOR_TAGS}, got {self.tag!r}")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.shape[0]


def _as_values(v) -> np.ndarray:
    if isinstance(v, FeatureVector):
        return v.values
    return check_vector(v, "vector")


# ---------------------------------------------------------------------------
# HOG

def hog_length(height: int, width: int, cell: int = 8, block: int = 2, bins: int = 9) -> int:
    cy, cx = height // cell, width // cell
    by, bx = cy - block + 1, cx - block + 1
    return by * bx * block * block * bins


def hog(img, cell: int = 8, block: int = 2, bins: int = 9) -> FeatureVector:
    """Histogram-of-oriented-gradients descriptor.

    Centered-difference gradients with replicated borders; unsigned
    orientations in [0, 180) split into `bins` channels with bin centers
    at multiples of 180/bins and bilinear voting between the two nearest
    centers; cell histograms pooled over `cell` x `cell` pixels; blocks
    of block x block cells at stride one cell, each L2-normalized with a
    1e-6 epsilon; blocks concatenated row-major.
    """
    arr = check_grayscale_image(_pixels(img), "hog input").astype(np.float64)
    h, w = arr.shape
    if h % cell or w % cell:
        raise ValueError(f"image dimensions {h}x{w} not divisible by cell size {cell}")
    p = np.pad(arr, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / 2.0
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / 2.0
    mag = np.hypot(gx, gy)
    ang = np.rad2deg(np.arctan2(gy, gx)) % 180.0

    bin_width = 180.0 / bins
    pos = ang / bin_width
    lo = np.floor(pos).astype(int) % bins
    frac = pos - np.floor(pos)
    hi = (lo + 1) % bins

    cy, cx = h // cell, w // cell
    cells = np.zeros((cy, cx, bins))
    votes_lo = mag * (1.0 - frac)
    votes_hi = mag * frac
    for b in range(bins):
        m_lo = np.where(lo == b, votes_lo, 0.0)
        m_hi = np.where(hi == b, votes_hi, 0.0)
        contrib = (m_lo + m_hi).reshape(cy, cell, cx, cell)
        cells[:, :, b] = contrib.sum(axis=(1, 3))

    by, bx = cy - block + 1, cx - block + 1
    if by < 1 or bx < 1:
        raise ValueError("image too small for block size")
    out = np.empty((by, bx, block * block * bins))
    for i in range(by):
        for j in range(bx):
            v = cells[i:i + block, j:j + block].ravel()
            out[i, j] = v / (np.linalg.norm(v) + 1e-6)
    return FeatureVector(out.ravel(), tag="hog")


# ---------------------------------------------------------------------------
# 4x4 grid mass distribution

def grid_feature(img, grid: int = 4) -> FeatureVector:
    """Fraction of total pixel mass in each grid cell, row-major.

    Intended input is a content-cropped binary image (content = 255).
    An all-zero image yields the zero vector rather than an error, since
    augmentation can legitimately produce empty sketches.
    """
    arr = check_grayscale_image(_pixels(img), "grid input").astype(np.float64)
    h, w = arr.shape
    if h % grid or w % grid:
        raise ValueError(f"image dimensions {h}x{w} not divisible by grid {grid}")
    sums = arr.reshape(grid, h // grid, grid, w // grid).sum(axis=(1, 3))
    total = sums.sum()
    if total == 0.0:
        return FeatureVector(np.zeros(grid * grid), tag="grid")
    return FeatureVector((sums / total).ravel(), tag="grid")


# ---------------------------------------------------------------------------
# similarity

def cosine_sim(u, v) -> float:
    """u.v / (|u||v|), in [-1, 1]; zero-norm inputs are undefined."""
    a, b = _as_values(u), _as_values(v)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for zero vectors")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def l2_distance(u, v) -> float:
    """Euclidean distance between two equal-length vectors."""
    a, b = _as_values(u), _as_values(v)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    return float(np.linalg.norm(a - b))


def _pixels(img):
    return img.pixels if hasattr(img, "pixels") else img
