import json

import numpy as np
import pytest
from PIL import Image

from texseg.colltex import CollTexConfig, generate_colltex
from texseg.colltex import truth_from_meta as colltex_truth
from texseg.dataset import (
    MANIFEST_VERSION,
    load_sample,
    read_manifest,
    sample_dir_name,
    write_dataset,
)
from texseg.omniglot import OmniglotConfig, generate_omniglot
from texseg.omniglot import truth_from_meta as omniglot_truth


@pytest.fixture
def colltex_dataset(tmp_path, texture_store):
    cfg = CollTexConfig(global_seed=55, image_size=64,
                        patch_size_range=(16, 24), regions_range=(2, 4))
    samples = [generate_colltex(cfg, texture_store, i) for i in range(3)]
    out = tmp_path / "ds"
    manifest = write_dataset(enumerate(samples), out, "colltex",
                             {"global_seed": 55, "image_size": 64})
    return out, samples, manifest


class TestLayout:
    def test_directories_and_files(self, colltex_dataset):
        out, samples, _ = colltex_dataset
        assert (out / "manifest.json").is_file()
        for i in range(3):
            sdir = out / "samples" / sample_dir_name(i)
            for name in ("image.png", "mask.png", "reference.png"):
                assert (sdir / name).is_file()

    def test_sample_dir_names_are_zero_padded(self):
        assert sample_dir_name(0) == "000000"
        assert sample_dir_name(123456) == "123456"

    def test_mask_png_is_strictly_bilevel(self, colltex_dataset):
        out, _, _ = colltex_dataset
        raw = np.asarray(Image.open(out / "samples/000000/mask.png"))
        assert raw.dtype == np.uint8
        assert set(np.unique(raw)) <= {0, 255}

    def test_manifest_fields(self, colltex_dataset):
        out, _, manifest = colltex_dataset
        on_disk = json.loads((out / "manifest.json").read_text())
        assert on_disk == json.loads(json.dumps(manifest))  # tuples decode as lists
        assert on_disk["format_version"] == MANIFEST_VERSION
        assert on_disk["task"] == "colltex"
        assert on_disk["config"]["global_seed"] == 55
        ids = [e["id"] for e in on_disk["samples"]]
        assert ids == ["000000", "000001", "000002"]
        indices = [e["index"] for e in on_disk["samples"]]
        assert indices == sorted(indices)

    def test_manifest_bytes_deterministic(self, tmp_path, texture_store):
        cfg = CollTexConfig(global_seed=55, image_size=64,
                            patch_size_range=(16, 16), regions_range=(2, 2))
        samples = [generate_colltex(cfg, texture_store, i) for i in range(2)]
        blobs = []
        for name in ("a", "b"):
            out = tmp_path / name
            write_dataset(enumerate(samples), out, "colltex", {"global_seed": 55})
            blobs.append((out / "manifest.json").read_bytes())
        assert blobs[0] == blobs[1]
        assert blobs[0].endswith(b"\n")


class TestRoundtrip:
    def test_decoded_arrays_match_originals(self, colltex_dataset):
        out, samples, manifest = colltex_dataset
        for entry, original in zip(manifest["samples"], samples):
            loaded = load_sample(out, entry)
            assert np.array_equal(loaded.image, original.image)
            assert np.array_equal(loaded.reference, original.reference)
            assert np.array_equal(loaded.truth, original.truth)

    def test_colltex_truth_rebuilds_from_manifest_meta(self, colltex_dataset):
        out, _, _ = colltex_dataset
        manifest = read_manifest(out)
        size = manifest["config"]["image_size"]
        for entry in manifest["samples"]:
            loaded = load_sample(out, entry)
            rebuilt = colltex_truth(entry["meta"], size)
            assert np.array_equal(rebuilt, loaded.truth)

    def test_omniglot_truth_rebuilds_from_manifest_meta(self, tmp_path, glyph_set,
                                                        texture_store):
        cfg = OmniglotConfig(global_seed=9, num_characters=3,
                             use_synth_textures=False)
        samples = [generate_omniglot(cfg, glyph_set, texture_store, i) for i in range(2)]
        out = tmp_path / "og"
        write_dataset(enumerate(samples), out, "omniglot", {"global_seed": 9})
        manifest = read_manifest(out)
        for entry in manifest["samples"]:
            loaded = load_sample(out, entry)
            rebuilt = omniglot_truth(entry["meta"], glyph_set, 256)
            assert np.array_equal(rebuilt, loaded.truth)

    def test_shape_mismatch_detected(self, colltex_dataset):
        out, _, manifest = colltex_dataset
        entry = dict(manifest["samples"][0])
        entry["image_shape"] = [32, 32]
        with pytest.raises(ValueError, match="000000"):
            load_sample(out, entry)


class TestReadManifest:
    def test_missing_manifest(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_manifest(tmp_path)

    def test_malformed_json(self, tmp_path):
        (tmp_path / "manifest.json").write_text("{not json")
        with pytest.raises(ValueError, match="malformed"):
            read_manifest(tmp_path)

    @pytest.mark.parametrize("missing", ["format_version", "task", "config", "samples"])
    def test_missing_field_named(self, tmp_path, missing):
        manifest = {"format_version": 1, "task": "colltex", "config": {}, "samples": []}
        del manifest[missing]
        (tmp_path / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(ValueError, match=missing):
            read_manifest(tmp_path)
