"""Command-line interface.

Subcommands:

    texseg generate colltex  --textures DIR --out DIR [options]
    texseg generate omniglot --textures DIR --glyphs DIR --out DIR [options]
    texseg baseline run      --data DIR --out DIR [options]
    texseg eval              --pred DIR --truth DIR [options]
    texseg split export      --textures DIR [--glyphs DIR] --out FILE [options]

Exit status: 0 success, 1 usage error, 2 runtime failure.  Sample
generation and baseline prediction parallelize over sample indices
(--workers, default from TEXSEG_WORKERS); every sample derives its own
RNG stream from (seed, index), so worker count never changes any output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from .colltex import CollTexConfig, generate_colltex
from .dataset import load_sample, read_manifest, write_manifest, write_sample
from .images import save_prob_png
from .matcher import (
    DEFAULT_CLEANUP_RADIUS,
    DEFAULT_SCALES,
    DEFAULT_THRESHOLD,
    FilterBankConfig,
    run_baseline,
)
from .metrics import DEFAULT_THRESHOLD as EVAL_THRESHOLD
from .metrics import evaluate_dataset, format_report
from .omniglot import OmniglotConfig, generate_omniglot, load_glyphs
from .textures import load_textures

DEFAULT_HOLDOUT = 100


class _Parser(argparse.ArgumentParser):
    """argparse variant reporting usage problems with exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parse_range(text: str) -> tuple[int, int]:
    """'4..16' -> (4, 16); a bare '8' -> (8, 8)."""
    lo, sep, hi = text.partition("..")
    try:
        low = int(lo)
        high = int(hi) if sep else low
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN..MAX or N, got {text!r}")
    if high < low:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return low, high


def _default_workers() -> int:
    raw = os.environ.get("TEXSEG_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _add_store_flags(p: argparse.ArgumentParser, glyphs: bool = False):
    p.add_argument("--textures", required=True, help="texture image directory")
    if glyphs:
        p.add_argument("--glyphs", required=True, help="105x105 character image directory")
    p.add_argument("--holdout", type=int, default=DEFAULT_HOLDOUT,
                   help="held-out item count per corpus (default %(default)s)")
    p.add_argument("--split-seed", type=int, default=0,
                   help="seed for the held-out split draw (default %(default)s)")


def _add_generate_flags(p: argparse.ArgumentParser):
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--num-samples", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="global generation seed")
    p.add_argument("--patch-size", type=_parse_range, default=(64, 64),
                   metavar="MIN..MAX", help="reference patch side (default 64..64)")
    p.add_argument("--split", choices=("train", "test"), default="train")
    p.add_argument("--workers", type=int, default=_default_workers())


def build_parser() -> _Parser:
    parser = _Parser(prog="texseg", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a benchmark dataset")
    gen_sub = gen.add_subparsers(dest="task", required=True)

    colltex = gen_sub.add_parser("colltex", help="nearest-anchor texture collages")
    _add_store_flags(colltex)
    _add_generate_flags(colltex)
    colltex.add_argument("--regions", type=_parse_range, default=(2, 10),
                         metavar="MIN..MAX", help="region count range (default 2..10)")

    omniglot = gen_sub.add_parser("omniglot", help="texturized cluttered characters")
    _add_store_flags(omniglot, glyphs=True)
    _add_generate_flags(omniglot)
    omniglot.add_argument("--chars", type=int, default=8, help="characters per scene")
    omniglot.add_argument("--background", action="store_true",
                          help="fill the background with a held-out texture")

    baseline = sub.add_parser("baseline", help="run the filter-bank matcher")
    base_sub = baseline.add_subparsers(dest="action", required=True)
    run = base_sub.add_parser("run", help="predict every sample of a dataset")
    run.add_argument("--data", required=True, help="dataset directory (with manifest.json)")
    run.add_argument("--out", required=True, help="directory for probability-map PNGs")
    run.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                     help="cosine threshold for the binary mask (default %(default)s)")
    run.add_argument("--mode", choices=("mean", "xcorr"), default="mean",
                     help="reference aggregation (default %(default)s)")
    run.add_argument("--scales", type=int, nargs="*", default=list(DEFAULT_SCALES),
                     help="feature window sizes; empty for RGB-only")
    run.add_argument("--cleanup-radius", type=int, default=DEFAULT_CLEANUP_RADIUS)
    run.add_argument("--workers", type=int, default=_default_workers())

    ev = sub.add_parser("eval", help="score probability maps against a dataset")
    ev.add_argument("--pred", required=True, help="directory of <sample-id>.png maps")
    ev.add_argument("--truth", required=True, help="dataset directory")
    ev.add_argument("--threshold", type=float, default=EVAL_THRESHOLD)
    ev.add_argument("--report", choices=("json", "table"), default="table")

    split = sub.add_parser("split", help="inspect train/test splits")
    split_sub = split.add_subparsers(dest="action", required=True)
    export = split_sub.add_parser("export", help="write split assignments as JSON")
    _add_store_flags(export)
    export.add_argument("--glyphs", help="optional character directory")
    export.add_argument("--out", required=True, help="output JSON file")

    return parser


# ---------------------------------------------------------------------------
# Worker-pool plumbing.  Workers are (re)initialized with everything needed
# to generate or predict one sample; tasks are plain indices/entries so the
# pool never ships arrays.

_CTX: dict = {}


def _init_generate(task, textures_dir, glyphs_dir, holdout, split_seed, config, out_dir):
    global _CTX
    store = load_textures(textures_dir, holdout, split_seed)
    glyphs = load_glyphs(glyphs_dir, holdout, split_seed) if glyphs_dir else None
    _CTX = {"task": task, "store": store, "glyphs": glyphs,
            "config": config, "out_dir": out_dir}


def _generate_one(index: int) -> dict:
    task = _CTX["task"]
    if task == "colltex":
        sample = generate_colltex(_CTX["config"], _CTX["store"], index)
    else:
        sample = generate_omniglot(_CTX["config"], _CTX["glyphs"], _CTX["store"], index)
    return write_sample(_CTX["out_dir"], index, sample)


def _init_baseline(data_dir, out_dir, cfg):
    global _CTX
    _CTX = {"data_dir": data_dir, "out_dir": out_dir, "cfg": cfg}


def _baseline_one(entry: dict) -> str:
    sample = load_sample(_CTX["data_dir"], entry)
    prob, _mask = run_baseline(sample, _CTX["cfg"])
    save_prob_png(prob, Path(_CTX["out_dir"]) / f"{entry['id']}.png")
    return entry["id"]


def _run_pool(workers: int, initializer, initargs, fn, items: list) -> list:
    if workers <= 1:
        initializer(*initargs)
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers, initializer=initializer,
                             initargs=initargs) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# Subcommand handlers.


def _cmd_generate(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.task == "colltex":
        config = CollTexConfig(
            global_seed=args.seed,
            patch_size_range=args.patch_size,
            regions_range=args.regions,
            split=args.split,
        )
        glyphs_dir = None
    else:
        config = OmniglotConfig(
            global_seed=args.seed,
            num_characters=args.chars,
            background_textured=args.background,
            patch_size_range=args.patch_size,
            split=args.split,
        )
        glyphs_dir = args.glyphs

    entries = _run_pool(
        args.workers,
        _init_generate,
        (args.task, args.textures, glyphs_dir, args.holdout, args.split_seed,
         config, out_dir),
        _generate_one,
        list(range(args.num_samples)),
    )
    echo = asdict(config)
    echo.update({"holdout_count": args.holdout, "corpus_split_seed": args.split_seed})
    write_manifest(out_dir, args.task, echo, entries)
    print(f"wrote {len(entries)} {args.task} samples to {out_dir}")
    return 0


def _cmd_baseline_run(args) -> int:
    cfg = FilterBankConfig(
        window_scales=tuple(args.scales),
        aggregation_mode="mean_reference" if args.mode == "mean" else "full_xcorr",
        threshold=args.threshold,
        cleanup_radius=args.cleanup_radius,
    )
    manifest = read_manifest(args.data)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    done = _run_pool(args.workers, _init_baseline, (args.data, out_dir, cfg),
                     _baseline_one, manifest["samples"])
    print(f"wrote {len(done)} probability maps to {out_dir}")
    return 0


def _cmd_eval(args) -> int:
    report = evaluate_dataset(args.pred, args.truth, args.threshold)
    if args.report == "json":
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(format_report(report, per_sample=True))
    return 0


def _cmd_split_export(args) -> int:
    store = load_textures(args.textures, args.holdout, args.split_seed)
    payload = {"textures": store.split_manifest()}
    if args.glyphs:
        payload["glyphs"] = load_glyphs(args.glyphs, args.holdout,
                                        args.split_seed).split_manifest()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote split assignments to {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "baseline":
            return _cmd_baseline_run(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "split":
            return _cmd_split_export(args)
        raise AssertionError(f"unhandled command {args.command!r}")
    except (ValueError, FileNotFoundError, NotADirectoryError, RuntimeError,
            OSError) as exc:
        print(f"texseg: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
