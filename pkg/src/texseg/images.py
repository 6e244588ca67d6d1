"""Image and mask array conventions shared by all modules.

Arrays are plain numpy:
  Rgb8Image  -- (H, W, 3) uint8, row-major interleaved RGB
  BinaryMask -- (H, W) uint8 with values in {0, 1}
  ProbMask   -- (H, W) float64 with values in [0, 1]

Validators raise ValueError with the offending property named; they
return the array unchanged so call sites can validate inline.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

Rgb8Image = np.ndarray
BinaryMask = np.ndarray
ProbMask = np.ndarray


def validate_rgb8(img: np.ndarray) -> Rgb8Image:
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"RGB image must have shape (H, W, 3), got {img.shape}")
    if img.dtype != np.uint8:
        raise ValueError(f"RGB image must be uint8, got {img.dtype}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"image dimensions must be >= 1, got {img.shape[:2]}")
    return img


def validate_binary_mask(mask: np.ndarray) -> BinaryMask:
    if mask.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {mask.shape}")
    if mask.dtype != np.uint8:
        raise ValueError(f"mask must be uint8, got {mask.dtype}")
    bad = (mask != 0) & (mask != 1)
    if bad.any():
        raise ValueError(f"mask contains {int(bad.sum())} values outside {{0, 1}}")
    return mask


def validate_prob_mask(pred: np.ndarray) -> ProbMask:
    if pred.ndim != 2:
        raise ValueError(f"probability mask must be 2-D, got shape {pred.shape}")
    pred = np.asarray(pred, dtype=np.float64)
    if pred.size and (pred.min() < 0.0 or pred.max() > 1.0):
        raise ValueError(
            f"probability mask values must lie in [0, 1], got range "
            f"[{pred.min():.6g}, {pred.max():.6g}]"
        )
    return pred


def load_rgb8(path: str | Path) -> Rgb8Image:
    """Decode a PNG/JPEG file to (H, W, 3) uint8."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_rgb8(img: Rgb8Image, path: str | Path) -> None:
    Image.fromarray(validate_rgb8(img), mode="RGB").save(path, format="PNG")


def load_gray8(path: str | Path) -> np.ndarray:
    """Decode an image file to (H, W) uint8 grayscale."""
    with Image.open(path) as im:
        return np.asarray(im.convert("L"), dtype=np.uint8)


def save_gray8(gray: np.ndarray, path: str | Path) -> None:
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise ValueError(f"grayscale image must be 2-D uint8, got {gray.shape} {gray.dtype}")
    Image.fromarray(gray, mode="L").save(path, format="PNG")


def save_mask_png(mask: BinaryMask, path: str | Path) -> None:
    """Store a {0,1} mask as a viewable {0,255} grayscale PNG."""
    save_gray8(validate_binary_mask(mask) * np.uint8(255), path)


def load_mask_png(path: str | Path) -> BinaryMask:
    """Read a {0,255} grayscale PNG back to a {0,1} mask."""
    gray = load_gray8(path)
    bad = (gray != 0) & (gray != 255)
    if bad.any():
        raise ValueError(f"{path}: mask PNG contains values other than 0 and 255")
    return (gray == 255).astype(np.uint8)


def save_prob_png(pred: ProbMask, path: str | Path) -> None:
    """Store a [0,1] probability map as 8-bit grayscale (value = round(255*p))."""
    save_gray8(np.rint(validate_prob_mask(pred) * 255.0).astype(np.uint8), path)


def load_prob_png(path: str | Path) -> ProbMask:
    return load_gray8(path).astype(np.float64) / 255.0
