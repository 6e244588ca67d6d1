"""Texture corpus: ingestion, train/test split, crops, and short-scale synthesis.

A store assigns dense ids to image files in lexicographic path order, so
the id space and the held-out split survive filesystem enumeration-order
differences.  Pixel data is decoded lazily and memoized per process.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.signal import convolve2d

from .images import Rgb8Image, load_rgb8
from .rng import RngStream, derive_stream

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}

# Reserved stream index for split derivation, so a split never shares a
# stream with sample 0 of a generator run using the same seed.
_SPLIT_STREAM_INDEX = 0x73706C6974

SYNTH_KERNEL_SIZE = 5


@dataclass(frozen=True)
class TextureRecord:
    id: int
    split: str  # "train" or "test"
    width: int
    height: int
    source: Path


@dataclass
class TextureStore:
    records: list[TextureRecord]
    holdout_count: int
    split_seed: int
    _cache: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.records)

    def record(self, texture_id: int) -> TextureRecord:
        if not 0 <= texture_id < len(self.records):
            raise ValueError(f"unknown texture id {texture_id} (store has {len(self.records)})")
        return self.records[texture_id]

    def ids_for_split(self, split: str) -> list[int]:
        if split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {split!r}")
        return [r.id for r in self.records if r.split == split]

    def pixels(self, texture_id: int) -> Rgb8Image:
        rec = self.record(texture_id)
        cached = self._cache.get(texture_id)
        if cached is None:
            cached = load_rgb8(rec.source)
            self._cache[texture_id] = cached
        return cached

    def split_manifest(self) -> dict:
        return {
            "split_seed": self.split_seed,
            "holdout_count": self.holdout_count,
            "test_ids": [r.id for r in self.records if r.split == "test"],
            "files": [str(r.source) for r in self.records],
        }


def holdout_split(n_items: int, holdout_count: int, split_seed: int) -> set[int]:
    """Indices of the held-out (test) items among 0..n_items-1.

    Pure function of its arguments; callers supply indices derived from
    the lexicographically sorted file list.
    """
    if holdout_count < 0:
        raise ValueError("holdout_count must be non-negative")
    if n_items < holdout_count + 1:
        raise ValueError(
            f"need at least holdout_count + 1 = {holdout_count + 1} items, got {n_items}"
        )
    if holdout_count == 0:
        return set()
    rng = derive_stream(split_seed, _SPLIT_STREAM_INDEX)
    return set(rng.choose_distinct(list(range(n_items)), holdout_count))


def _scan_image_files(directory: Path) -> list[Path]:
    if not directory.is_dir():
        raise FileNotFoundError(f"texture directory not found: {directory}")
    files = [
        p for p in directory.rglob("*")
        if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES
    ]
    files.sort(key=lambda p: p.relative_to(directory).as_posix())
    return files


def load_textures(directory: str | Path, holdout_count: int, split_seed: int) -> TextureStore:
    """Build a store over all PNG/JPEG files under directory.

    The split assignment depends only on the sorted file list,
    holdout_count, and split_seed.
    """
    directory = Path(directory)
    files = _scan_image_files(directory)
    test_ids = holdout_split(len(files), holdout_count, split_seed)

    records = []
    for idx, path in enumerate(files):
        try:
            with Image.open(path) as im:
                width, height = im.size
        except Exception as exc:
            raise ValueError(f"unreadable image {path}: {exc}") from exc
        records.append(TextureRecord(
            id=idx,
            split="test" if idx in test_ids else "train",
            width=width,
            height=height,
            source=path,
        ))
    return TextureStore(records=records, holdout_count=holdout_count, split_seed=split_seed)


def _tile_to_cover(src: np.ndarray, out_width: int, out_height: int) -> np.ndarray:
    """Tile src periodically until it covers out_width x out_height."""
    h, w = src.shape[:2]
    reps_y = -(-out_height // h)  # ceil division
    reps_x = -(-out_width // w)
    if reps_y > 1 or reps_x > 1:
        src = np.tile(src, (reps_y, reps_x, 1))
    return src


def sample_crop_offset(
    store: TextureStore, texture_id: int, out_width: int, out_height: int, rng: RngStream
) -> tuple[int, int]:
    """Uniform (x, y) crop offset into the (tiled) source; x drawn first."""
    rec = store.record(texture_id)
    tiled_w = max(rec.width, -(-out_width // rec.width) * rec.width)
    tiled_h = max(rec.height, -(-out_height // rec.height) * rec.height)
    ox = rng.randint(0, tiled_w - out_width)
    oy = rng.randint(0, tiled_h - out_height)
    return ox, oy


def crop_texture_at(
    store: TextureStore, texture_id: int, ox: int, oy: int, out_width: int, out_height: int
) -> Rgb8Image:
    """Crop at a known offset; tiles the source first if it is too small.

    Pure pixel copy: no resampling or interpolation.
    """
    src = _tile_to_cover(store.pixels(texture_id), out_width, out_height)
    if not (0 <= ox <= src.shape[1] - out_width and 0 <= oy <= src.shape[0] - out_height):
        raise ValueError(
            f"crop offset ({ox}, {oy}) out of range for texture {texture_id} "
            f"tiled to {src.shape[1]}x{src.shape[0]}, crop {out_width}x{out_height}"
        )
    return np.ascontiguousarray(src[oy:oy + out_height, ox:ox + out_width])


def crop_texture(
    store: TextureStore, texture_id: int, out_width: int, out_height: int, rng: RngStream
) -> Rgb8Image:
    """Crop of the texture at a uniformly sampled offset."""
    ox, oy = sample_crop_offset(store, texture_id, out_width, out_height, rng)
    return crop_texture_at(store, texture_id, ox, oy, out_width, out_height)


def _channel_stats(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean (3,) and population channel covariance (3, 3)."""
    flat = pixels.reshape(-1, 3).astype(np.float64)
    mean = flat.mean(axis=0)
    centered = flat - mean
    cov = centered.T @ centered / flat.shape[0]
    return mean, cov


def _matrix_sqrt(cov: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def _matrix_inv_sqrt(cov: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(cov)
    floor = max(vals.max(), 0.0) * 1e-10 + 1e-30
    vals = np.clip(vals, floor, None)
    return (vecs / np.sqrt(vals)) @ vecs.T


def synth_shortscale(
    store: TextureStore, texture_id: int, out_size: int, rng: RngStream
) -> Rgb8Image:
    """Procedural short-correlation-length texture matched to a source.

    White noise is convolved with a random 5x5 kernel per channel, then
    affinely remapped so the per-channel mean and 3x3 channel covariance
    equal the source texture's.  The output decorrelates beyond the
    kernel support, so its length scale stays below ~5 pixels.
    """
    mean_src, cov_src = _channel_stats(store.pixels(texture_id))

    k = SYNTH_KERNEL_SIZE
    pad = k - 1
    # Draw order: 3 kernels (25 doubles each in [-1, 1)), then the three
    # noise fields as one block.
    kernels = (2.0 * rng.doubles(3 * k * k) - 1.0).reshape(3, k, k)
    noise = rng.doubles(3 * (out_size + pad) ** 2).reshape(3, out_size + pad, out_size + pad)

    filtered = np.empty((out_size * out_size, 3), dtype=np.float64)
    for c in range(3):
        filtered[:, c] = convolve2d(noise[c], kernels[c], mode="valid").ravel()

    mean_f = filtered.mean(axis=0)
    centered = filtered - mean_f
    cov_f = centered.T @ centered / filtered.shape[0]

    # Whiten the filtered noise, then color with the source covariance;
    # empirical mean and covariance of the remapped field match the
    # source exactly (before clamping).
    transform = _matrix_sqrt(cov_src) @ _matrix_inv_sqrt(cov_f)
    remapped = mean_src + centered @ transform.T
    out = np.clip(np.rint(remapped), 0.0, 255.0).astype(np.uint8)
    return out.reshape(out_size, out_size, 3)
