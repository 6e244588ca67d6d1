"""Reader for texseg benchmark datasets.

Consumes the on-disk layout written by ``texseg generate`` -- a
``manifest.json`` plus per-sample PNG directories -- and hands back
float arrays ready for training pipelines.  Read-only; safe for
concurrent readers.  This package never imports the generator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

__version__ = "0.1.0"

__all__ = ["Batch", "DatasetHandle", "LoadedSample", "iterate_batches", "open_dataset"]

_MANIFEST_FIELDS = ("format_version", "task", "config", "samples")
_ENTRY_FIELDS = ("id", "index", "image", "mask", "reference",
                 "image_shape", "reference_shape")


@dataclass(frozen=True)
class LoadedSample:
    """One decoded sample: images scaled to [0, 1], mask in {0, 1}."""

    image: np.ndarray      # (H, W, 3) float64
    reference: np.ndarray  # (h, w, 3) float64
    mask: np.ndarray       # (H, W) uint8
    meta: dict             # the sample's manifest entry


@dataclass(frozen=True)
class Batch:
    """A slice of the dataset with images/masks stacked along axis 0.

    References are stacked too when every patch in the batch has the
    same size, and kept as a list otherwise (patch sizes may vary
    within one dataset).
    """

    indices: list[int]
    images: np.ndarray
    references: np.ndarray | list[np.ndarray]
    masks: np.ndarray
    metas: list[dict]

    def __len__(self) -> int:
        return len(self.indices)


def _decode_rgb(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.uint8)
    return arr.astype(np.float64) / 255.0


def _decode_mask(path: Path, sample_id: str) -> np.ndarray:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"), dtype=np.uint8)
    bad = np.setdiff1d(np.unique(arr), [0, 255])
    if bad.size:
        raise ValueError(
            f"sample {sample_id}: mask holds non-binary values {bad.tolist()}"
        )
    return (arr // 255).astype(np.uint8)


class DatasetHandle:
    """Lazily indexable view of one dataset directory."""

    def __init__(self, root: Path, manifest: dict):
        self._root = root
        self._manifest = manifest
        self._entries = manifest["samples"]

    @property
    def task(self) -> str:
        return self._manifest["task"]

    @property
    def config(self) -> dict:
        return self._manifest["config"]

    def __len__(self) -> int:
        return len(self._entries)

    def __getitem__(self, index: int) -> LoadedSample:
        entry = self._entries[index]
        image = _decode_rgb(self._root / entry["image"])
        reference = _decode_rgb(self._root / entry["reference"])
        mask = _decode_mask(self._root / entry["mask"], entry["id"])
        expected = tuple(entry["image_shape"])
        if image.shape[:2] != expected or mask.shape != expected:
            raise ValueError(
                f"sample {entry['id']}: decoded shape {image.shape[:2]} does not "
                f"match manifest {expected}"
            )
        if reference.shape[:2] != tuple(entry["reference_shape"]):
            raise ValueError(
                f"sample {entry['id']}: reference shape {reference.shape[:2]} does "
                f"not match manifest {tuple(entry['reference_shape'])}"
            )
        return LoadedSample(image=image, reference=reference, mask=mask, meta=entry)


def open_dataset(path: str | Path) -> DatasetHandle:
    """Open a dataset directory after validating its manifest schema."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no manifest.json under {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed manifest {manifest_path}: {exc}") from exc
    for field in _MANIFEST_FIELDS:
        if field not in manifest:
            raise ValueError(f"manifest {manifest_path} missing field {field!r}")
    for entry in manifest["samples"]:
        for field in _ENTRY_FIELDS:
            if field not in entry:
                raise ValueError(
                    f"manifest {manifest_path} sample entry missing field {field!r}"
                )
    return DatasetHandle(root, manifest)


def iterate_batches(handle: DatasetHandle, batch_size: int, shuffle_seed=None):
    """Yield Batch objects covering the dataset once.

    With ``shuffle_seed`` set, the visit order is a seeded permutation
    (identical across calls with the same seed); with None, manifest
    order.  The final batch may be smaller than ``batch_size``.
    """
    if batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {batch_size}")
    n = len(handle)
    if shuffle_seed is None:
        order = np.arange(n)
    else:
        order = np.random.default_rng(shuffle_seed).permutation(n)
    for start in range(0, n, batch_size):
        chunk = [int(i) for i in order[start:start + batch_size]]
        samples = [handle[i] for i in chunk]
        refs = [s.reference for s in samples]
        if len({r.shape for r in refs}) == 1:
            refs = np.stack(refs)
        yield Batch(
            indices=chunk,
            images=np.stack([s.image for s in samples]),
            references=refs,
            masks=np.stack([s.mask for s in samples]),
            metas=[s.meta for s in samples],
        )
