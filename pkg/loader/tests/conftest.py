"""Fixtures: datasets produced by the generator CLI, consumed read-only.

The loader is exercised purely against the documented on-disk layout,
so these fixtures shell out to ``texseg generate`` rather than import
the generator package.
"""

import subprocess
import sys

import numpy as np
import pytest
from PIL import Image


def _write_textures(directory, count=8, seed=424242):
    rng = np.random.default_rng(seed)
    directory.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        base = rng.integers(40, 216, size=3)
        img = np.clip(
            base + rng.integers(-30, 31, size=(96, 96, 3)), 0, 255
        ).astype(np.uint8)
        if i % 2 == 0:  # give half the corpus an oriented structure
            img[:, ::4] = np.clip(base + 60, 0, 255)
        Image.fromarray(img).save(directory / f"tex_{i:02d}.png")


def _generate(texture_dir, out_dir, num_samples, extra=()):
    cmd = [sys.executable, "-m", "texseg.cli", "generate", "colltex",
           "--textures", str(texture_dir),
           "--holdout", "2",
           "--out", str(out_dir),
           "--num-samples", str(num_samples),
           "--seed", "11",
           "--regions", "2..3",
           *extra]
    subprocess.run(cmd, check=True, capture_output=True, text=True)


@pytest.fixture(scope="session")
def texture_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("textures")
    _write_textures(directory)
    return directory


@pytest.fixture(scope="session")
def dataset_dir(texture_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("datasets") / "ten"
    _generate(texture_dir, out, 10)
    return out


@pytest.fixture(scope="session")
def ragged_dataset_dir(texture_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("datasets") / "ragged"
    _generate(texture_dir, out, 5, extra=("--patch-size", "16..48"))
    return out
