"""Texture-collage sample generation.

A sample is built from its (global_seed, sample_index) stream in a fixed
draw order: region count, anchor points (resampled wholesale until every
region owns at least one pixel), texture assignment, per-region crop
offsets, reference slot, patch size, reference crop offset.  The
manifest metadata records every draw, so the truth mask and image can be
reconstructed without the stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .images import BinaryMask, Rgb8Image
from .partition import PartitionSpec, all_regions_present, rasterize, sample_anchors
from .rng import derive_stream
from .textures import TextureStore, crop_texture_at, sample_crop_offset

MAX_ANCHOR_RETRIES = 100


@dataclass(frozen=True)
class CollTexConfig:
    global_seed: int
    image_size: int = 256
    patch_size_range: tuple[int, int] = (64, 64)
    regions_range: tuple[int, int] = (2, 10)
    textures_with_replacement: bool = False
    split: str = "train"

    def __post_init__(self):
        if self.regions_range[0] < 1 or self.regions_range[0] > self.regions_range[1]:
            raise ValueError(f"invalid regions range {self.regions_range}")
        if self.patch_size_range[0] < 1 or self.patch_size_range[0] > self.patch_size_range[1]:
            raise ValueError(f"invalid patch size range {self.patch_size_range}")
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {self.split!r}")


@dataclass
class CollTexSample:
    image: Rgb8Image
    reference: Rgb8Image
    truth: BinaryMask
    meta: dict = field(default_factory=dict)


def region_truth(
    regions: np.ndarray, assignment: list[int], reference_id: int
) -> BinaryMask:
    """Mask of pixels whose region carries the reference texture."""
    n = int(regions.max()) + 1
    if len(assignment) < n:
        raise ValueError(f"assignment covers {len(assignment)} regions, map has {n}")
    if reference_id not in assignment:
        raise ValueError(f"reference texture {reference_id} not assigned to any region")
    lut = np.asarray([1 if t == reference_id else 0 for t in assignment], dtype=np.uint8)
    return lut[regions]


def generate_colltex(
    config: CollTexConfig, store: TextureStore, sample_index: int
) -> CollTexSample:
    rng = derive_stream(config.global_seed, sample_index)
    size = config.image_size

    n = rng.randint(*config.regions_range)

    available = store.ids_for_split(config.split)
    if not config.textures_with_replacement and len(available) < config.regions_range[1]:
        raise ValueError(
            f"split '{config.split}' holds {len(available)} textures, need at least "
            f"{config.regions_range[1]} for without-replacement assignment"
        )
    if config.textures_with_replacement and not available:
        raise ValueError(f"split '{config.split}' holds no textures")

    spec = regions = None
    retries = 0
    for attempt in range(MAX_ANCHOR_RETRIES + 1):
        spec = sample_anchors(n, size, rng)
        regions = rasterize(spec)
        if all_regions_present(regions, n):
            retries = attempt
            break
    else:
        raise RuntimeError(
            f"sample {sample_index}: no anchor set with {n} non-empty regions "
            f"after {MAX_ANCHOR_RETRIES} retries"
        )

    if config.textures_with_replacement:
        assignment = [available[rng.randint(0, len(available) - 1)] for _ in range(n)]
    else:
        assignment = rng.choose_distinct(available, n)

    image = np.zeros((size, size, 3), dtype=np.uint8)
    crop_offsets = []
    for r in range(n):
        ox, oy = sample_crop_offset(store, assignment[r], size, size, rng)
        crop_offsets.append((ox, oy))
        crop = crop_texture_at(store, assignment[r], ox, oy, size, size)
        sel = regions == r
        image[sel] = crop[sel]

    reference_slot = rng.randint(0, n - 1)
    reference_id = assignment[reference_slot]
    patch_size = rng.randint(*config.patch_size_range)
    ref_ox, ref_oy = sample_crop_offset(store, reference_id, patch_size, patch_size, rng)
    reference = crop_texture_at(store, reference_id, ref_ox, ref_oy, patch_size, patch_size)

    truth = region_truth(regions, assignment, reference_id)

    meta = {
        "sample_index": sample_index,
        "n_regions": n,
        "anchors": [[float(x), float(y)] for x, y in spec.anchors],
        "region_texture_ids": assignment,
        "region_crop_offsets": crop_offsets,
        "reference_texture_id": reference_id,
        "reference_crop_offset": (ref_ox, ref_oy),
        "patch_size": patch_size,
        "anchor_retries": retries,
    }
    return CollTexSample(image=image, reference=reference, truth=truth, meta=meta)


def truth_from_meta(meta: dict, image_size: int) -> BinaryMask:
    """Reconstruct the ground-truth mask from recorded metadata alone."""
    spec = PartitionSpec(size=image_size, anchors=np.asarray(meta["anchors"], dtype=np.float64))
    regions = rasterize(spec)
    return region_truth(regions, list(meta["region_texture_ids"]), meta["reference_texture_id"])


def image_from_meta(meta: dict, store: TextureStore, image_size: int) -> Rgb8Image:
    """Reconstruct the composed canvas from recorded metadata and the store."""
    spec = PartitionSpec(size=image_size, anchors=np.asarray(meta["anchors"], dtype=np.float64))
    regions = rasterize(spec)
    image = np.zeros((image_size, image_size, 3), dtype=np.uint8)
    for r, (tex_id, (ox, oy)) in enumerate(
        zip(meta["region_texture_ids"], meta["region_crop_offsets"])
    ):
        crop = crop_texture_at(store, tex_id, ox, oy, image_size, image_size)
        sel = regions == r
        image[sel] = crop[sel]
    return image
