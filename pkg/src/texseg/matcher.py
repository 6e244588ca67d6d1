"""Non-learned texture matcher.

Pipeline: embed image and reference patch into per-position unit-norm
feature fields, score each image position against the reference by cosine
similarity, threshold, and clean up with morphology.  Features are local
statistics over a few window sizes -- no learned parameters anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage, signal

from .images import BinaryMask, ProbMask, Rgb8Image, validate_rgb8

DEFAULT_SCALES = (5, 11, 21)
DEFAULT_THRESHOLD = 0.55
DEFAULT_CLEANUP_RADIUS = 2

# RGB and local-mean channels live in [0, 1]; shifting them by this offset
# puts a flat mid-gray window at the zero vector, so dissimilar textures
# can score near zero (or negative) and the threshold's "midpoint above
# orthogonality" reading holds.  Spread/gradient channels already vanish
# for structureless windows and are left unshifted.
CHANNEL_CENTER = 0.5


@dataclass(frozen=True)
class FilterBankConfig:
    window_scales: tuple[int, ...] = DEFAULT_SCALES
    aggregation_mode: str = "mean_reference"
    threshold: float = DEFAULT_THRESHOLD
    cleanup_radius: int = DEFAULT_CLEANUP_RADIUS

    def __post_init__(self):
        object.__setattr__(self, "window_scales", tuple(self.window_scales))
        for w in self.window_scales:
            if w < 3 or w % 2 == 0:
                raise ValueError(f"window sizes must be odd and >= 3, got {w}")
        if self.aggregation_mode not in ("mean_reference", "full_xcorr"):
            raise ValueError(f"unknown aggregation mode {self.aggregation_mode!r}")
        if not -1.0 < self.threshold < 1.0:
            raise ValueError(f"threshold must lie in (-1, 1), got {self.threshold}")
        if self.cleanup_radius < 0:
            raise ValueError("cleanup_radius must be >= 0")

    @property
    def channels(self) -> int:
        return 3 + 9 * len(self.window_scales)

    @property
    def border(self) -> int:
        """Half the largest window; 0 when no windowed features are used."""
        return max(self.window_scales) // 2 if self.window_scales else 0


@dataclass(frozen=True)
class EmbeddingField:
    data: np.ndarray  # (H, W, C) float64, unit vectors (or exact zeros)
    border: int

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def local_statistics(image01: np.ndarray, window: int):
    """(mean, std, gradient-magnitude mean) per channel over a centered window.

    ``image01`` is (H, W, 3) float in [0, 1].  Windows reflect at the
    borders.  Gradients are central differences (one-sided at edges).
    """
    mean = np.empty_like(image01)
    sq_mean = np.empty_like(image01)
    grad_mean = np.empty_like(image01)
    for c in range(image01.shape[2]):
        chan = image01[:, :, c]
        mean[:, :, c] = ndimage.uniform_filter(chan, size=window, mode="reflect")
        sq_mean[:, :, c] = ndimage.uniform_filter(chan * chan, size=window, mode="reflect")
        gy, gx = np.gradient(chan)
        grad_mean[:, :, c] = ndimage.uniform_filter(
            np.hypot(gy, gx), size=window, mode="reflect"
        )
    std = np.sqrt(np.maximum(sq_mean - mean * mean, 0.0))
    return mean, std, grad_mean


def embed(image: Rgb8Image, cfg: FilterBankConfig) -> EmbeddingField:
    """Per-position unit-norm feature field for an RGB image.

    Channels: the RGB values themselves, then for each window scale the
    per-channel local mean, local standard deviation, and local mean of
    gradient magnitude (C = 3 + 9 per scale).  RGB and local-mean
    channels are shifted by CHANNEL_CENTER before normalization; raw
    zero vectors are left as exact zeros rather than normalized.
    """
    validate_rgb8(image)
    h, w = image.shape[:2]
    if cfg.window_scales:
        largest = max(cfg.window_scales)
        if h < largest or w < largest:
            raise ValueError(
                f"image {w}x{h} is smaller than the largest window ({largest})"
            )

    img01 = image.astype(np.float64) / 255.0
    planes = [img01 - CHANNEL_CENTER]
    for scale in cfg.window_scales:
        mean, std, grad_mean = local_statistics(img01, scale)
        planes.extend([mean - CHANNEL_CENTER, std, grad_mean])
    feats = np.concatenate(planes, axis=2)

    norms = np.sqrt((feats * feats).sum(axis=2, keepdims=True))
    nonzero = norms[:, :, 0] > 0.0
    unit = np.zeros_like(feats)
    unit[nonzero] = feats[nonzero] / norms[nonzero]
    return EmbeddingField(data=unit, border=cfg.border)


def reference_vector(field: EmbeddingField) -> np.ndarray:
    """Unit-norm mean of the field's interior position vectors.

    A border of half the largest window is excluded so reflect-padding
    artifacts do not bias the aggregate.
    """
    b = field.border
    interior = field.data[b:field.height - b, b:field.width - b]
    if interior.size == 0:
        raise ValueError("reference field has no interior after border exclusion")
    mean = interior.reshape(-1, field.channels).mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-12:
        raise ValueError("degenerate reference: interior vectors cancel to zero")
    return mean / norm


def similarity_map(field: EmbeddingField, ref: np.ndarray) -> np.ndarray:
    """Cosine score per position: dot product of unit vectors, in [-1, 1]."""
    if ref.shape != (field.channels,):
        raise ValueError(
            f"reference has {ref.shape} channels, field has {field.channels}"
        )
    return field.data @ ref


def xcorr_map(image_field: EmbeddingField, ref_field: EmbeddingField) -> np.ndarray:
    """Sliding dot product of two fields, averaged over reference positions.

    Valid-mode cross-correlation (summed over channels) divided by the
    reference position count, written back at each window's center pixel
    (offset h//2, w//2); border rows/columns where the window would exit
    the image repeat the nearest valid value.
    """
    if image_field.channels != ref_field.channels:
        raise ValueError(
            f"channel mismatch: image {image_field.channels} vs "
            f"reference {ref_field.channels}"
        )
    ih, iw = image_field.height, image_field.width
    rh, rw = ref_field.height, ref_field.width
    if rh >= ih or rw >= iw:
        raise ValueError(
            f"reference field {rw}x{rh} must be smaller than image field {iw}x{ih}"
        )
    if not np.any(ref_field.data):
        raise ValueError("degenerate reference: all-zero field")

    valid = np.zeros((ih - rh + 1, iw - rw + 1), dtype=np.float64)
    flipped = ref_field.data[::-1, ::-1, :]
    for c in range(image_field.channels):
        valid += signal.fftconvolve(
            image_field.data[:, :, c], flipped[:, :, c], mode="valid"
        )
    valid /= rh * rw

    top, left = rh // 2, rw // 2
    bottom = ih - valid.shape[0] - top
    right = iw - valid.shape[1] - left
    return np.pad(valid, ((top, bottom), (left, right)), mode="edge")


def _disk(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(span, span, indexing="ij")
    return (yy * yy + xx * xx) <= radius * radius


def segment(score_map: np.ndarray, cfg: FilterBankConfig) -> BinaryMask:
    """Threshold a similarity map, then open+close with a small disk."""
    mask = score_map >= cfg.threshold
    if cfg.cleanup_radius > 0:
        structure = _disk(cfg.cleanup_radius)
        mask = ndimage.binary_opening(mask, structure=structure)
        mask = ndimage.binary_closing(mask, structure=structure)
    return mask.astype(np.uint8)


def run_baseline(sample, cfg: FilterBankConfig) -> tuple[ProbMask, BinaryMask]:
    """Segment a sample's image against its reference patch.

    Returns the similarity remapped to [0, 1] via (s + 1) / 2 as a
    probability map, plus the thresholded-and-cleaned binary mask.
    """
    image_field = embed(sample.image, cfg)
    ref_field = embed(sample.reference, cfg)
    if cfg.aggregation_mode == "mean_reference":
        sim = similarity_map(image_field, reference_vector(ref_field))
    else:
        sim = xcorr_map(image_field, ref_field)
    prob = np.clip((sim + 1.0) / 2.0, 0.0, 1.0)
    return prob, segment(sim, cfg)
