import pytest

from texseg.omniglot import load_glyphs
from texseg.textures import load_textures

from _corpora import build_glyph_corpus, build_texture_corpus

HOLDOUT = 4
SPLIT_SEED = 0


@pytest.fixture(scope="session")
def texture_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("textures")
    build_texture_corpus(directory)
    return directory


@pytest.fixture(scope="session")
def glyph_dir(tmp_path_factory):
    directory = tmp_path_factory.mktemp("glyphs")
    build_glyph_corpus(directory)
    return directory


@pytest.fixture(scope="session")
def texture_store(texture_dir):
    return load_textures(texture_dir, holdout_count=HOLDOUT, split_seed=SPLIT_SEED)


@pytest.fixture(scope="session")
def glyph_set(glyph_dir):
    return load_glyphs(glyph_dir, holdout_count=HOLDOUT, split_seed=SPLIT_SEED)
