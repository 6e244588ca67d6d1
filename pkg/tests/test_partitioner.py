import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from texseg.images import load_gray8
from texseg.partition import (
    PartitionSpec,
    all_regions_present,
    export_region_map,
    rasterize,
    region_masks,
    sample_anchors,
)
from texseg.rng import derive_stream


def nearest_anchor_bruteforce(anchors, x_pix, y_pix):
    """Reference rule: squared distance from the pixel center, first minimum."""
    cx, cy = x_pix + 0.5, y_pix + 0.5
    best = None
    for k, (ax, ay) in enumerate(anchors):
        d = (ax - cx) ** 2 + (ay - cy) ** 2
        if best is None or d < best[0]:
            best = (d, k)
    return best[1]


class TestSampleAnchors:
    def test_zero_regions_rejected(self):
        with pytest.raises(ValueError, match="at least one region"):
            sample_anchors(0, 256, derive_stream(0, 0))

    def test_points_inside_canvas(self):
        spec = sample_anchors(10, 256, derive_stream(4, 1))
        assert spec.anchors.shape == (10, 2)
        assert np.all(spec.anchors >= 0.0) and np.all(spec.anchors < 256.0)

    def test_same_stream_origin_identical(self):
        a = sample_anchors(6, 128, derive_stream(9, 9))
        b = sample_anchors(6, 128, derive_stream(9, 9))
        assert np.array_equal(a.anchors, b.anchors)

    def test_spec_rejects_outside_anchors(self):
        with pytest.raises(ValueError, match="inside"):
            PartitionSpec(size=16, anchors=np.array([[16.0, 3.0]]))


class TestRasterize:
    def test_single_anchor_owns_everything(self):
        spec = PartitionSpec(size=32, anchors=np.array([[20.0, 3.0]]))
        assert np.all(rasterize(spec) == 0)

    def test_two_anchor_vertical_split(self):
        spec = PartitionSpec(size=256, anchors=np.array([[64.0, 128.0], [192.0, 128.0]]))
        regions = rasterize(spec)
        assert np.all(regions[:, :128] == 0)
        assert np.all(regions[:, 128:] == 1)

    def test_coincident_anchors_take_lowest_index(self):
        spec = PartitionSpec(size=16, anchors=np.array([[8.0, 8.0], [8.0, 8.0]]))
        assert np.all(rasterize(spec) == 0)

    def test_mirrored_anchor_tie_goes_low(self):
        # pixel centers on the vertical midline are equidistant from both
        spec = PartitionSpec(size=8, anchors=np.array([[3.0, 4.0], [5.0, 4.0]]))
        regions = rasterize(spec)
        assert np.all(regions[:, :4] == 0)
        assert np.all(regions[:, 4:] == 1)
        mirrored = PartitionSpec(size=8, anchors=np.array([[3.5, 4.0], [4.5, 4.0]]))
        m = rasterize(mirrored)
        # centers at x=4.0 are exactly equidistant; lowest index wins
        assert np.all(m[:, 3] == 0) and np.all(m[:, 4] == 1)

    def test_agrees_with_bruteforce_oracle(self):
        rng = derive_stream(77, 0)
        px = np.random.default_rng(5)
        for trial in range(5):
            n = rng.randint(2, 20)
            spec = sample_anchors(n, 256, rng)
            regions = rasterize(spec)
            xs = px.integers(0, 256, size=300)
            ys = px.integers(0, 256, size=300)
            for x, y in zip(xs, ys):
                assert regions[y, x] == nearest_anchor_bruteforce(spec.anchors, x, y)

    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=8),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
    )
    def test_region_map_is_a_partition(self, n, seed):
        spec = sample_anchors(n, 32, derive_stream(seed, 0))
        regions = rasterize(spec)
        assert regions.shape == (32, 32) and regions.dtype == np.int32
        assert regions.min() >= 0 and regions.max() < n
        masks = region_masks(regions, n)
        union = np.zeros((32, 32), dtype=int)
        for m in masks:
            union += m.astype(int)
        assert np.all(union == 1)  # exactly one region per pixel


class TestHelpers:
    def test_all_regions_present(self):
        spec = PartitionSpec(size=64, anchors=np.array([[10.0, 10.0], [50.0, 50.0]]))
        assert all_regions_present(rasterize(spec), 2)
        assert not all_regions_present(np.zeros((4, 4), dtype=np.int32), 2)

    def test_export_roundtrip(self, tmp_path):
        spec = sample_anchors(5, 64, derive_stream(1, 0))
        regions = rasterize(spec)
        export_region_map(regions, tmp_path / "r.png")
        assert np.array_equal(load_gray8(tmp_path / "r.png"), regions.astype(np.uint8))

    def test_export_limited_to_256_regions(self, tmp_path):
        too_many = np.full((4, 4), 300, dtype=np.int32)
        with pytest.raises(ValueError, match="256"):
            export_region_map(too_many, tmp_path / "r.png")
