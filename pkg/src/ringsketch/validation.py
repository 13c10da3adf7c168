"""Input validation helpers.

Light-weight checks shared by the estimator-style classes and the
functional ops. All helpers either return the validated array (possibly
converted) or raise :class:`~ringsketch.errors.ImageError` /
``ValueError`` with a message naming the offending argument.
"""

from __future__ import annotations

import numpy as np

from .errors import ImageError


def check_grayscale_image(img, name: str = "img") -> np.ndarray:
    """Validate a 2-D uint8 grayscale image and return it as uint8."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ImageError(f"{name} must be a 2-D grayscale array, got shape {arr.shape}")
    if arr.size == 0:
        raise ImageError(f"{name} is empty")
    if arr.dtype != np.uint8:
        if not np.issubdtype(arr.dtype, np.integer):
            raise ImageError(f"{name} must hold integer intensities in [0, 255]")
        if arr.min() < 0 or arr.max() > 255:
            raise ImageError(f"{name} values outside [0, 255]")
        arr = arr.astype(np.uint8)
    return arr


def check_binary_image(img, name: str = "img") -> np.ndarray:
    """Validate a binary {0, 255} image."""
    arr = check_grayscale_image(img, name)
    values = np.unique(arr)
    if not np.isin(values, (0, 255)).all():
        raise ImageError(f"{name} must be binary with values in {{0, 255}}")
    return arr


def check_vector(v, name: str = "v") -> np.ndarray:
    """Validate a finite 1-D float vector."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_length(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape[0] != v.shape[0]:
        raise ValueError(f"vector length mismatch: {u.shape[0]} vs {v.shape[0]}")


def check_feature_matrix(X, name: str = "X") -> np.ndarray:
    """Validate a 2-D finite float matrix (rows = samples)."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite values")
    return arr
