"""Nearest-anchor (Voronoi) partitioning of a square pixel canvas.

Distances are measured from pixel centers (x + 0.5, y + 0.5) so no
pixel ever sits exactly on a region boundary defined by anchors at
integer coordinates.  Ties (possible for coincident or mirrored
anchors) go to the lowest anchor index.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .images import save_gray8
from .rng import RngStream


@dataclass(frozen=True)
class PartitionSpec:
    size: int
    anchors: np.ndarray  # (N, 2) float64, columns (x, y), all in [0, size)

    def __post_init__(self):
        anchors = np.asarray(self.anchors, dtype=np.float64)
        if anchors.ndim != 2 or anchors.shape[1] != 2 or anchors.shape[0] < 1:
            raise ValueError(f"anchors must have shape (N >= 1, 2), got {anchors.shape}")
        if np.any(anchors < 0.0) or np.any(anchors >= self.size):
            raise ValueError("all anchors must lie inside [0, size)^2")
        object.__setattr__(self, "anchors", anchors)

    @property
    def n_regions(self) -> int:
        return self.anchors.shape[0]


RegionMap = np.ndarray  # (H, W) int32 of region indices in 0..N-1


def sample_anchors(n: int, size: int, rng: RngStream) -> PartitionSpec:
    """n i.i.d. uniform anchor points on [0, size)^2; x drawn before y."""
    if n < 1:
        raise ValueError("at least one region required")
    anchors = np.empty((n, 2), dtype=np.float64)
    for k in range(n):
        anchors[k, 0] = rng.uniform(0.0, float(size))
        anchors[k, 1] = rng.uniform(0.0, float(size))
    return PartitionSpec(size=size, anchors=anchors)


def rasterize(spec: PartitionSpec) -> RegionMap:
    """Assign every pixel to its nearest anchor by squared Euclidean distance.

    np.argmin returns the first minimum, which realizes the
    lowest-index tie-break.
    """
    size = spec.size
    centers = np.arange(size, dtype=np.float64) + 0.5
    dx = centers[None, :] - spec.anchors[:, 0][:, None]  # (N, size)
    dy = centers[None, :] - spec.anchors[:, 1][:, None]
    # squared distance, broadcast to (N, H, W)
    dist = dy[:, :, None] ** 2 + dx[:, None, :] ** 2
    return np.argmin(dist, axis=0).astype(np.int32)


def region_masks(regions: RegionMap, n: int) -> list[np.ndarray]:
    """Boolean mask per region index 0..n-1."""
    return [regions == r for r in range(n)]


def all_regions_present(regions: RegionMap, n: int) -> bool:
    return len(np.unique(regions)) == n


def export_region_map(regions: RegionMap, path: str | Path) -> None:
    """Debug view: region index as 8-bit gray level (requires N <= 256)."""
    if regions.max(initial=0) > 255:
        raise ValueError("region map export supports at most 256 regions")
    save_gray8(regions.astype(np.uint8), path)
