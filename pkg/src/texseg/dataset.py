"""On-disk dataset layout and manifest.

A dataset directory holds ``manifest.json`` plus one directory per sample:

    out_dir/
      manifest.json
      samples/000000/{image.png, mask.png, reference.png}
      samples/000001/...

Masks are stored as {0, 255} grayscale PNG.  The manifest echoes the full
generator configuration and per-sample metadata (anchors or placements,
texture ids, offsets, z-orders), which is enough to regenerate every
truth mask without replaying the RNG.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .images import (
    BinaryMask,
    Rgb8Image,
    load_mask_png,
    load_rgb8,
    save_mask_png,
    save_rgb8,
)

MANIFEST_VERSION = 1


def sample_dir_name(index: int) -> str:
    return f"{index:06d}"


@dataclass
class DatasetSample:
    id: str
    image: Rgb8Image
    reference: Rgb8Image
    truth: BinaryMask
    meta: dict = field(default_factory=dict)


def write_sample(out_dir: str | Path, index: int, sample) -> dict:
    """Write one sample's images under out_dir/samples and return its entry.

    ``sample`` needs ``image``, ``reference``, ``truth`` and ``meta``
    attributes (both generators' sample types qualify).
    """
    out_dir = Path(out_dir)
    name = sample_dir_name(index)
    sdir = out_dir / "samples" / name
    try:
        sdir.mkdir(parents=True, exist_ok=True)
        save_rgb8(sample.image, sdir / "image.png")
        save_mask_png(sample.truth, sdir / "mask.png")
        save_rgb8(sample.reference, sdir / "reference.png")
    except OSError as exc:
        raise OSError(f"failed writing sample {name} under {out_dir}: {exc}") from exc
    return {
        "id": name,
        "index": index,
        "image": f"samples/{name}/image.png",
        "mask": f"samples/{name}/mask.png",
        "reference": f"samples/{name}/reference.png",
        "image_shape": [int(sample.image.shape[0]), int(sample.image.shape[1])],
        "reference_shape": [int(sample.reference.shape[0]), int(sample.reference.shape[1])],
        "meta": sample.meta,
    }


def write_manifest(out_dir: str | Path, task: str, config: dict, entries: list[dict]) -> dict:
    """Assemble and write manifest.json; entries are sorted by index."""
    out_dir = Path(out_dir)
    manifest = {
        "format_version": MANIFEST_VERSION,
        "task": task,
        "config": config,
        "samples": sorted(entries, key=lambda e: e["index"]),
    }
    text = json.dumps(manifest, indent=2, sort_keys=True)
    (out_dir / "manifest.json").write_text(text + "\n")
    return manifest


def write_dataset(samples, out_dir: str | Path, task: str, config: dict) -> dict:
    """Write an iterable of (index, sample) pairs and the manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = [write_sample(out_dir, index, sample) for index, sample in samples]
    return write_manifest(out_dir, task, config, entries)


def read_manifest(dataset_dir: str | Path) -> dict:
    dataset_dir = Path(dataset_dir)
    path = dataset_dir / "manifest.json"
    if not path.is_file():
        raise FileNotFoundError(f"no manifest.json under {dataset_dir}")
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed manifest {path}: {exc}") from exc
    for key in ("format_version", "task", "config", "samples"):
        if key not in manifest:
            raise ValueError(f"manifest {path} missing field {key!r}")
    return manifest


def load_sample(dataset_dir: str | Path, entry: dict) -> DatasetSample:
    """Load one manifest entry's images back into arrays."""
    dataset_dir = Path(dataset_dir)
    image = load_rgb8(dataset_dir / entry["image"])
    reference = load_rgb8(dataset_dir / entry["reference"])
    truth = load_mask_png(dataset_dir / entry["mask"])
    expected = tuple(entry["image_shape"])
    if image.shape[:2] != expected or truth.shape != expected:
        raise ValueError(
            f"sample {entry['id']}: decoded shape {image.shape[:2]} does not match "
            f"manifest {expected}"
        )
    if reference.shape[:2] != tuple(entry["reference_shape"]):
        raise ValueError(
            f"sample {entry['id']}: reference shape {reference.shape[:2]} does not "
            f"match manifest {tuple(entry['reference_shape'])}"
        )
    return DatasetSample(
        id=entry["id"], image=image, reference=reference, truth=truth,
        meta=entry.get("meta", {}),
    )
