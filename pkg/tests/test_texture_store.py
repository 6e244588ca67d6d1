import numpy as np
import pytest
from PIL import Image

from texseg.rng import derive_stream
from texseg.textures import (
    SYNTH_KERNEL_SIZE,
    crop_texture,
    crop_texture_at,
    holdout_split,
    load_textures,
    sample_crop_offset,
    synth_shortscale,
)

from conftest import HOLDOUT


class TestHoldoutSplit:
    def test_sizes_and_range(self):
        test_ids = holdout_split(964, 100, split_seed=0)
        assert len(test_ids) == 100
        assert all(0 <= i < 964 for i in test_ids)

    def test_deterministic(self):
        assert holdout_split(50, 10, 3) == holdout_split(50, 10, 3)

    def test_seed_changes_selection(self):
        assert holdout_split(200, 50, 0) != holdout_split(200, 50, 1)

    def test_zero_holdout(self):
        assert holdout_split(5, 0, 0) == set()

    def test_needs_one_training_item(self):
        with pytest.raises(ValueError, match="at least"):
            holdout_split(100, 100, 0)

    def test_negative_holdout_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            holdout_split(10, -1, 0)


class TestStore:
    def test_ids_follow_sorted_file_order(self, texture_store, texture_dir):
        expected = sorted(p.name for p in texture_dir.iterdir() if p.suffix == ".png")
        assert [r.source.name for r in texture_store.records] == expected
        assert [r.id for r in texture_store.records] == list(range(len(expected)))

    def test_split_partition(self, texture_store):
        train = texture_store.ids_for_split("train")
        test = texture_store.ids_for_split("test")
        assert len(test) == HOLDOUT
        assert sorted(train + test) == list(range(len(texture_store)))

    def test_split_stable_across_loads(self, texture_dir, texture_store):
        again = load_textures(texture_dir, holdout_count=HOLDOUT, split_seed=0)
        assert again.ids_for_split("test") == texture_store.ids_for_split("test")

    def test_pixels_memoized_and_match_file(self, texture_store):
        a = texture_store.pixels(0)
        assert a is texture_store.pixels(0)
        rec = texture_store.record(0)
        assert a.shape == (rec.height, rec.width, 3)

    def test_unknown_id_rejected(self, texture_store):
        with pytest.raises(ValueError, match="unknown texture id"):
            texture_store.record(len(texture_store))

    def test_bad_split_name(self, texture_store):
        with pytest.raises(ValueError, match="train"):
            texture_store.ids_for_split("validation")

    def test_missing_directory(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_textures(tmp_path / "absent", 0, 0)

    def test_unreadable_file_named(self, tmp_path):
        good = np.zeros((8, 8, 3), dtype=np.uint8)
        Image.fromarray(good).save(tmp_path / "a.png")
        (tmp_path / "broken.png").write_bytes(b"not a png at all")
        with pytest.raises(ValueError, match="broken.png"):
            load_textures(tmp_path, 0, 0)

    def test_split_manifest_contents(self, texture_store):
        man = texture_store.split_manifest()
        assert man["holdout_count"] == HOLDOUT
        assert len(man["test_ids"]) == HOLDOUT
        assert len(man["files"]) == len(texture_store)


class TestCrops:
    def test_crop_is_a_pure_window_of_the_tiling(self, texture_store):
        rng = derive_stream(10, 0)
        tid = 0
        src = texture_store.pixels(tid)
        ox, oy = sample_crop_offset(texture_store, tid, 256, 256, rng)
        crop = crop_texture_at(texture_store, tid, ox, oy, 256, 256)
        h, w = src.shape[:2]
        for y, x in [(0, 0), (5, 200), (255, 255), (100, 17)]:
            assert np.array_equal(crop[y, x], src[(oy + y) % h, (ox + x) % w])

    def test_offsets_stay_in_bounds(self, texture_store):
        rng = derive_stream(11, 0)
        rec = texture_store.record(1)
        for _ in range(200):
            ox, oy = sample_crop_offset(texture_store, 1, 64, 64, rng)
            tiled_w = max(rec.width, -(-64 // rec.width) * rec.width)
            tiled_h = max(rec.height, -(-64 // rec.height) * rec.height)
            assert 0 <= ox <= tiled_w - 64
            assert 0 <= oy <= tiled_h - 64

    def test_out_of_range_offset_rejected(self, texture_store):
        with pytest.raises(ValueError, match="out of range"):
            crop_texture_at(texture_store, 0, 10_000, 0, 64, 64)

    def test_crop_texture_deterministic(self, texture_store):
        a = crop_texture(texture_store, 2, 48, 48, derive_stream(5, 7))
        b = crop_texture(texture_store, 2, 48, 48, derive_stream(5, 7))
        assert np.array_equal(a, b)
        assert a.shape == (48, 48, 3) and a.dtype == np.uint8


class TestSynth:
    def test_shape_dtype_and_determinism(self, texture_store):
        a = synth_shortscale(texture_store, 3, 96, derive_stream(1, 1))
        b = synth_shortscale(texture_store, 3, 96, derive_stream(1, 1))
        assert a.shape == (96, 96, 3) and a.dtype == np.uint8
        assert np.array_equal(a, b)

    def test_matches_source_channel_moments(self, texture_store):
        # moment matching happens before the [0,255] clamp, so check it on
        # a texture whose value range leaves the clamp inactive
        tid = 9
        src = texture_store.pixels(tid).reshape(-1, 3).astype(np.float64)
        out = synth_shortscale(texture_store, tid, 128, derive_stream(2, 9))
        flat = out.reshape(-1, 3).astype(np.float64)
        assert np.allclose(flat.mean(axis=0), src.mean(axis=0), atol=2.0)
        cov_src = np.cov(src.T, bias=True)
        cov_out = np.cov(flat.T, bias=True)
        # rounding/clamping keep this from being exact; scale-relative bound
        assert np.abs(cov_out - cov_src).max() <= 0.05 * max(cov_src.max(), 1.0) + 3.0

    def test_documented_draw_order(self, texture_store):
        """Kernels (75 doubles) then one noise block: replayable by hand."""
        from scipy.signal import convolve2d

        tid = 5
        out_size = 32
        got = synth_shortscale(texture_store, tid, out_size, derive_stream(8, 3))

        rng = derive_stream(8, 3)
        k = SYNTH_KERNEL_SIZE
        pad = k - 1
        kernels = (2.0 * rng.doubles(3 * k * k) - 1.0).reshape(3, k, k)
        noise = rng.doubles(3 * (out_size + pad) ** 2).reshape(3, out_size + pad, out_size + pad)
        filtered = np.stack(
            [convolve2d(noise[c], kernels[c], mode="valid").ravel() for c in range(3)],
            axis=1,
        )
        src = texture_store.pixels(tid).reshape(-1, 3).astype(np.float64)
        mean_src = src.mean(axis=0)
        cov_src = np.cov(src.T, bias=True)
        mean_f = filtered.mean(axis=0)
        centered = filtered - mean_f
        cov_f = np.cov(filtered.T, bias=True)

        def msqrt(m):
            vals, vecs = np.linalg.eigh(m)
            return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.T

        def minvsqrt(m):
            vals, vecs = np.linalg.eigh(m)
            floor = max(vals.max(), 0.0) * 1e-10 + 1e-30
            return (vecs / np.sqrt(np.clip(vals, floor, None))) @ vecs.T

        remapped = mean_src + centered @ (msqrt(cov_src) @ minvsqrt(cov_f)).T
        expected = np.clip(np.rint(remapped), 0, 255).astype(np.uint8).reshape(out_size, out_size, 3)
        assert np.array_equal(got, expected)

    def test_short_correlation_length(self, texture_store):
        """Autocorrelation beyond the kernel support stays near zero."""
        out = synth_shortscale(texture_store, 0, 128, derive_stream(3, 3)).astype(np.float64)
        chan = out[:, :, 0] - out[:, :, 0].mean()
        var = (chan * chan).mean()
        lag = SYNTH_KERNEL_SIZE + 1
        corr = (chan[:, :-lag] * chan[:, lag:]).mean() / var
        assert abs(corr) < 0.1
