"""Grayscale PNG image I/O (Pillow-backed).

Everything in the pipeline is a 2-D uint8 array; color inputs are
converted to luminance on load so downstream code never sees channels.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ImageError


def load_image(path) -> np.ndarray:
    """Load an image file as a 2-D uint8 grayscale array."""
    try:
        with Image.open(path) as im:
            return np.asarray(im.convert("L"), dtype=np.uint8)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ImageError(f"cannot read image {path}: {exc}") from None


def decode_image(data: bytes) -> np.ndarray:
    """Decode encoded image bytes (PNG etc.) to 2-D uint8 grayscale."""
    try:
        with Image.open(io.BytesIO(data)) as im:
            return np.asarray(im.convert("L"), dtype=np.uint8)
    except Exception as exc:
        raise ImageError(f"cannot decode image bytes: {exc}") from None


def save_image(image: np.ndarray, path) -> None:
    """Write a 2-D uint8 array as a grayscale PNG."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ImageError(f"expected 2-D grayscale image, got shape {arr.shape}")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path, format="PNG")


def encode_png(image: np.ndarray) -> bytes:
    """Encode a 2-D uint8 array as PNG bytes."""
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ImageError(f"expected 2-D grayscale image, got shape {arr.shape}")
    buf = io.BytesIO()
    Image.fromarray(arr.astype(np.uint8), mode="L").save(buf, format="PNG")
    return buf.getvalue()
