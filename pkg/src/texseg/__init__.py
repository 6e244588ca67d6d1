"""Deterministic one-shot texture segmentation benchmarks.

Generators for collage and cluttered-character scenes with exact ground
truth, class-balanced metrics, and a non-learned cosine-matching
baseline, all reproducible from a single seed.
"""

from .colltex import CollTexConfig, CollTexSample, generate_colltex
from .dataset import load_sample, read_manifest, write_dataset
from .matcher import FilterBankConfig, embed, run_baseline
from .metrics import binarize, iou, weighted_bce
from .omniglot import GlyphSet, OmniglotConfig, generate_omniglot, load_glyphs
from .partition import PartitionSpec, rasterize, sample_anchors
from .rng import RngStream, derive_stream
from .textures import TextureStore, load_textures, synth_shortscale

__version__ = "0.1.0"

__all__ = [
    "CollTexConfig",
    "CollTexSample",
    "FilterBankConfig",
    "GlyphSet",
    "OmniglotConfig",
    "PartitionSpec",
    "RngStream",
    "TextureStore",
    "binarize",
    "derive_stream",
    "embed",
    "generate_colltex",
    "generate_omniglot",
    "iou",
    "load_glyphs",
    "load_sample",
    "load_textures",
    "rasterize",
    "read_manifest",
    "run_baseline",
    "sample_anchors",
    "synth_shortscale",
    "weighted_bce",
    "write_dataset",
    "__version__",
]
