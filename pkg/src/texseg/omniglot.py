"""Texturized cluttered character scenes.

Character stroke masks are scaled/rotated, filled with textures, and
composited onto a 256x256 canvas with painter's-algorithm occlusion in a
random z-order.  Ground truth is the VISIBLE pixel set of one target
placement, so the recorded placement metadata (geometry + z-order) is
enough to rebuild the mask without any texture or RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .images import BinaryMask, Rgb8Image, load_gray8
from .rng import RngStream, derive_stream
from .textures import (
    TextureStore,
    crop_texture,
    holdout_split,
    synth_shortscale,
)

GLYPH_SIZE = 105
CENTER_RANGE = (28, 228)
SCALE_RANGE = (0.5, 2.0)
MAX_SCENE_RETRIES = 100

_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


@dataclass(frozen=True)
class Glyph:
    id: int
    split: str
    source: Path
    mask: np.ndarray  # (105, 105) uint8, 1 = stroke


@dataclass
class GlyphSet:
    records: list[Glyph]
    holdout_count: int
    split_seed: int

    def __len__(self) -> int:
        return len(self.records)

    def glyph(self, glyph_id: int) -> Glyph:
        if not 0 <= glyph_id < len(self.records):
            raise ValueError(f"unknown glyph id {glyph_id} (set has {len(self.records)})")
        return self.records[glyph_id]

    def ids_for_split(self, split: str) -> list[int]:
        if split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {split!r}")
        return [g.id for g in self.records if g.split == split]

    def split_manifest(self) -> dict:
        return {
            "split_seed": self.split_seed,
            "holdout_count": self.holdout_count,
            "test_ids": [g.id for g in self.records if g.split == "test"],
            "files": [str(g.source) for g in self.records],
        }


def load_glyphs(
    directory: str | Path, holdout_count: int = 100, split_seed: int = 0
) -> GlyphSet:
    """Load 105x105 character images; strokes are the dark pixels.

    Images binarize at mid-gray (value < 128 is stroke).  The held-out
    split uses the same derivation as the texture store.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"glyph directory not found: {directory}")
    files = [
        p for p in directory.rglob("*")
        if p.is_file() and p.suffix.lower() in _IMAGE_SUFFIXES
    ]
    files.sort(key=lambda p: p.relative_to(directory).as_posix())
    test_ids = holdout_split(len(files), holdout_count, split_seed)

    records = []
    for idx, path in enumerate(files):
        try:
            gray = load_gray8(path)
        except Exception as exc:
            raise ValueError(f"unreadable glyph image {path}: {exc}") from exc
        if gray.shape != (GLYPH_SIZE, GLYPH_SIZE):
            raise ValueError(
                f"{path}: glyph must be {GLYPH_SIZE}x{GLYPH_SIZE}, "
                f"got {gray.shape[1]}x{gray.shape[0]}"
            )
        mask = (gray < 128).astype(np.uint8)
        if not mask.any():
            raise ValueError(f"{path}: glyph has no stroke pixels")
        records.append(Glyph(
            id=idx,
            split="test" if idx in test_ids else "train",
            source=path,
            mask=mask,
        ))
    return GlyphSet(records=records, holdout_count=holdout_count, split_seed=split_seed)


@dataclass(frozen=True)
class GlyphPlacement:
    glyph_id: int
    scale: float
    rotation: float
    center: tuple[int, int]  # (x, y)
    z_order: int
    texture_id: int


@dataclass(frozen=True)
class OmniglotConfig:
    global_seed: int
    num_characters: int = 8
    background_textured: bool = False
    image_size: int = 256
    patch_size_range: tuple[int, int] = (64, 64)
    split: str = "train"
    use_synth_textures: bool = True

    def __post_init__(self):
        if self.num_characters < 1:
            raise ValueError("num_characters must be >= 1")
        if self.patch_size_range[0] < 1 or self.patch_size_range[0] > self.patch_size_range[1]:
            raise ValueError(f"invalid patch size range {self.patch_size_range}")
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {self.split!r}")


@dataclass
class OmniglotSample:
    image: Rgb8Image
    reference: Rgb8Image
    truth: BinaryMask
    meta: dict = field(default_factory=dict)


def _bilinear(src: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Bilinear lookup at index coords (u, v); zero outside the source."""
    h, w = src.shape
    x0 = np.floor(u).astype(np.int64)
    y0 = np.floor(v).astype(np.int64)
    fx = u - x0
    fy = v - y0

    def tap(yy, xx):
        valid = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        out = np.zeros(u.shape, dtype=np.float64)
        out[valid] = src[yy[valid], xx[valid]]
        return out

    return (
        tap(y0, x0) * (1.0 - fx) * (1.0 - fy)
        + tap(y0, x0 + 1) * fx * (1.0 - fy)
        + tap(y0 + 1, x0) * (1.0 - fx) * fy
        + tap(y0 + 1, x0 + 1) * fx * fy
    )


def transform_glyph(glyph_mask: np.ndarray, scale: float, rotation: float) -> BinaryMask:
    """Scaled/rotated stroke mask on a square canvas sized to the rotated bbox.

    Each output pixel center is inverse-mapped through the
    rotation-then-scale about the glyph center and bilinearly sampled,
    then binarized at 0.5.  The 1e-9 slack absorbs float noise in the
    bbox formula so exact-math sizes (e.g. rotation by pi) are honored.
    """
    h, w = glyph_mask.shape
    extent = max(h, w) * scale * (abs(math.cos(rotation)) + abs(math.sin(rotation)))
    side = max(1, math.ceil(extent - 1e-9))

    half = side / 2.0
    ys, xs = np.mgrid[0:side, 0:side]
    px = xs + 0.5 - half
    py = ys + 0.5 - half

    cos_t = math.cos(rotation)
    sin_t = math.sin(rotation)
    inv_scale = 1.0 / scale
    # inverse of (rotate by rotation, then scale): rotate by -rotation, unscale
    sx = (cos_t * px + sin_t * py) * inv_scale + w / 2.0
    sy = (-sin_t * px + cos_t * py) * inv_scale + h / 2.0

    vals = _bilinear(glyph_mask.astype(np.float64), sx - 0.5, sy - 0.5)
    return (vals >= 0.5).astype(np.uint8)


def _paint_owner(
    placements: list[GlyphPlacement], glyphs: GlyphSet, size: int
) -> np.ndarray:
    """Per-pixel index of the topmost placement covering it, -1 for none.

    Placements are painted in ascending z_order; later paint overwrites.
    """
    owner = np.full((size, size), -1, dtype=np.int32)
    for slot in sorted(range(len(placements)), key=lambda i: placements[i].z_order):
        p = placements[slot]
        mask = transform_glyph(glyphs.glyph(p.glyph_id).mask, p.scale, p.rotation)
        side = mask.shape[0]
        left = p.center[0] - side // 2
        top = p.center[1] - side // 2
        x0, y0 = max(0, left), max(0, top)
        x1, y1 = min(size, left + side), min(size, top + side)
        if x1 <= x0 or y1 <= y0:
            continue
        window = mask[y0 - top:y1 - top, x0 - left:x1 - left] == 1
        owner[y0:y1, x0:x1][window] = slot
    return owner


def visible_masks_from_placements(
    placements: list[GlyphPlacement], glyphs: GlyphSet, size: int
) -> list[BinaryMask]:
    """Post-occlusion visible mask per placement (geometry only, no RNG)."""
    owner = _paint_owner(placements, glyphs, size)
    return [(owner == slot).astype(np.uint8) for slot in range(len(placements))]


def compose_scene(
    placements: list[GlyphPlacement],
    glyphs: GlyphSet,
    store: TextureStore,
    background: int | None,
    size: int,
    rng: RngStream,
    use_synth: bool = True,
    return_fills: bool = False,
):
    """Composite texturized placements; returns (image, visible masks).

    Texture fills are drawn from the stream in a fixed order (background
    first, then placements in list order) regardless of z-order, so the
    stream consumption does not depend on stacking.
    """
    if not placements:
        raise ValueError("compose_scene requires at least one placement")

    def fill_for(texture_id: int) -> Rgb8Image:
        if use_synth:
            return synth_shortscale(store, texture_id, size, rng)
        return crop_texture(store, texture_id, size, size, rng)

    if background is not None:
        canvas = fill_for(background).copy()
    else:
        canvas = np.zeros((size, size, 3), dtype=np.uint8)

    fills = [fill_for(p.texture_id) for p in placements]
    owner = _paint_owner(placements, glyphs, size)
    visible = []
    for slot in range(len(placements)):
        sel = owner == slot
        canvas[sel] = fills[slot][sel]
        visible.append(sel.astype(np.uint8))

    if return_fills:
        return canvas, visible, fills
    return canvas, visible


def generate_omniglot(
    config: OmniglotConfig, glyphs: GlyphSet, store: TextureStore, sample_index: int
) -> OmniglotSample:
    rng = derive_stream(config.global_seed, sample_index)
    size = config.image_size
    k = config.num_characters

    glyph_pool = glyphs.ids_for_split(config.split)
    tex_pool = store.ids_for_split(config.split)
    needed_tex = k + (1 if config.background_textured else 0)
    if len(glyph_pool) < k:
        raise ValueError(f"split '{config.split}' holds {len(glyph_pool)} glyphs, need {k}")
    if len(tex_pool) < needed_tex:
        raise ValueError(
            f"split '{config.split}' holds {len(tex_pool)} textures, need {needed_tex}"
        )

    for attempt in range(MAX_SCENE_RETRIES + 1):
        glyph_ids = rng.choose_distinct(glyph_pool, k)
        texture_ids = rng.choose_distinct(tex_pool, k)
        transforms = []
        for _ in range(k):
            scale = rng.uniform(*SCALE_RANGE)
            rotation = rng.uniform(0.0, 2.0 * math.pi)
            cx = rng.randint(*CENTER_RANGE)
            cy = rng.randint(*CENTER_RANGE)
            transforms.append((scale, rotation, (cx, cy)))
        z_orders = list(range(k))
        rng.shuffle(z_orders)
        placements = [
            GlyphPlacement(
                glyph_id=glyph_ids[j],
                scale=transforms[j][0],
                rotation=transforms[j][1],
                center=transforms[j][2],
                z_order=z_orders[j],
                texture_id=texture_ids[j],
            )
            for j in range(k)
        ]

        background_id = None
        if config.background_textured:
            used = set(texture_ids)
            remaining = [t for t in tex_pool if t not in used]
            background_id = remaining[rng.randint(0, len(remaining) - 1)]

        target = rng.randint(0, k - 1)
        patch_size = rng.randint(*config.patch_size_range)

        image, visible, fills = compose_scene(
            placements, glyphs, store, background_id, size, rng,
            use_synth=config.use_synth_textures, return_fills=True,
        )
        if visible[target].any():
            retries = attempt
            break
    else:
        raise RuntimeError(
            f"sample {sample_index}: target fully occluded or clipped in every "
            f"attempt ({MAX_SCENE_RETRIES} retries)"
        )

    # The reference is an exemplar of the target texture: a patch of the
    # same fill that textured the target (itself a crop/synth of the
    # texture), cropped at an offset independent of the glyph geometry.
    ref_ox = rng.randint(0, size - patch_size)
    ref_oy = rng.randint(0, size - patch_size)
    reference = np.ascontiguousarray(
        fills[target][ref_oy:ref_oy + patch_size, ref_ox:ref_ox + patch_size]
    )

    meta = {
        "sample_index": sample_index,
        "placements": [
            {
                "glyph_id": p.glyph_id,
                "scale": p.scale,
                "rotation": p.rotation,
                "center": list(p.center),
                "z_order": p.z_order,
                "texture_id": p.texture_id,
            }
            for p in placements
        ],
        "target_index": target,
        "background_texture_id": background_id,
        "patch_size": patch_size,
        "reference_crop_offset": (ref_ox, ref_oy),
        "scene_retries": retries,
    }
    return OmniglotSample(
        image=image, reference=reference, truth=visible[target], meta=meta
    )


def placements_from_meta(meta: dict) -> list[GlyphPlacement]:
    return [
        GlyphPlacement(
            glyph_id=p["glyph_id"],
            scale=p["scale"],
            rotation=p["rotation"],
            center=(p["center"][0], p["center"][1]),
            z_order=p["z_order"],
            texture_id=p["texture_id"],
        )
        for p in meta["placements"]
    ]


def truth_from_meta(meta: dict, glyphs: GlyphSet, image_size: int) -> BinaryMask:
    """Reconstruct the target's visible mask from recorded metadata alone."""
    masks = visible_masks_from_placements(placements_from_meta(meta), glyphs, image_size)
    return masks[meta["target_index"]]
