"""Segmentation metrics: class-balanced cross-entropy and IoU."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .images import (
    BinaryMask,
    ProbMask,
    load_mask_png,
    load_prob_png,
    validate_binary_mask,
    validate_prob_mask,
)

EPS = 1e-7
DEFAULT_THRESHOLD = 0.9


@dataclass(frozen=True)
class LossBreakdown:
    total: float
    foreground: float  # mean -ln(p) over truth-1 pixels
    background: float  # mean -ln(1-p) over truth-0 pixels
    n_foreground: int
    n_background: int


def weighted_bce(truth: BinaryMask, pred: ProbMask) -> LossBreakdown:
    """Cross-entropy with each class normalized by its own pixel count.

    total = -mean_{truth=1} ln(p) - mean_{truth=0} ln(1-p)

    Predictions are clamped to [EPS, 1-EPS] before the log.  An absent
    class contributes zero, so the loss stays finite on all-foreground or
    all-background truths.  Because each class is averaged over its own
    support, the value is invariant to tiling the inputs.
    """
    validate_binary_mask(truth)
    validate_prob_mask(pred)
    if pred.shape != truth.shape:
        raise ValueError(f"shape mismatch: truth {truth.shape} vs pred {pred.shape}")

    p = np.clip(pred, EPS, 1.0 - EPS)
    fg = truth == 1
    n_fg = int(fg.sum())
    n_bg = int(truth.size - n_fg)

    l_fg = float(-np.log(p[fg]).sum() / n_fg) if n_fg else 0.0
    l_bg = float(-np.log1p(-p[~fg]).sum() / n_bg) if n_bg else 0.0
    return LossBreakdown(
        total=l_fg + l_bg, foreground=l_fg, background=l_bg,
        n_foreground=n_fg, n_background=n_bg,
    )


def binarize(pred: ProbMask, threshold: float = DEFAULT_THRESHOLD) -> BinaryMask:
    """Foreground wherever the probability reaches the threshold."""
    validate_prob_mask(pred)
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
    return (pred >= threshold).astype(np.uint8)


def iou(a: BinaryMask, b: BinaryMask) -> float:
    """Intersection over union; two empty masks agree perfectly (1.0)."""
    validate_binary_mask(a)
    validate_binary_mask(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    a_on = a == 1
    b_on = b == 1
    union = int(np.logical_or(a_on, b_on).sum())
    if union == 0:
        return 1.0
    inter = int(np.logical_and(a_on, b_on).sum())
    return inter / union


def evaluate_dataset(
    pred_dir: str | Path,
    truth_dir: str | Path,
    threshold: float = DEFAULT_THRESHOLD,
) -> dict:
    """Score a directory of probability maps against a dataset's truths.

    ``truth_dir`` is a generated dataset (manifest + samples).
    Predictions are looked up as ``pred_dir/<sample_id>.png``; when that
    file is absent, ``pred_dir/samples/<sample_id>/mask.png`` is tried,
    so a dataset can be scored against itself.

    Alongside the overall mean, samples whose metadata carries
    (patch_size, n_regions) are aggregated into a mean-IoU grid keyed by
    those two values.
    """
    truth_dir = Path(truth_dir)
    pred_dir = Path(pred_dir)
    manifest_path = truth_dir / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"no manifest.json under {truth_dir}")
    manifest = json.loads(manifest_path.read_text())

    per_sample = []
    cells: dict[tuple[int, int], list[float]] = {}
    for sample in manifest["samples"]:
        sid = sample["id"]
        truth = load_mask_png(truth_dir / "samples" / sid / "mask.png")
        pred_path = pred_dir / f"{sid}.png"
        if not pred_path.is_file():
            fallback = pred_dir / "samples" / sid / "mask.png"
            if not fallback.is_file():
                raise FileNotFoundError(
                    f"missing prediction for sample {sid}: {pred_path}"
                )
            pred_path = fallback
        pred = load_prob_png(pred_path)
        loss = weighted_bce(truth, pred)
        score = iou(binarize(pred, threshold), truth)
        per_sample.append({"id": sid, "iou": score, "loss": loss.total})

        meta = sample.get("meta", {})
        if "patch_size" in meta and "n_regions" in meta:
            cells.setdefault((meta["patch_size"], meta["n_regions"]), []).append(score)

    if not per_sample:
        raise ValueError("dataset manifest lists no samples")
    grid = {
        f"{patch}x{regions}": float(np.mean(scores))
        for (patch, regions), scores in sorted(cells.items())
    }
    return {
        "n_samples": len(per_sample),
        "threshold": threshold,
        "mean_iou": float(np.mean([s["iou"] for s in per_sample])),
        "mean_loss": float(np.mean([s["loss"] for s in per_sample])),
        "grid": grid,
        "per_sample": per_sample,
    }


def _grid_table(grid: dict[str, float]) -> list[str]:
    """Aligned patch-size x region-count table from the grid mapping."""
    cells = {}
    for key, value in grid.items():
        patch, regions = key.split("x")
        cells[(int(patch), int(regions))] = value
    patches = sorted({p for p, _ in cells})
    regions = sorted({r for _, r in cells})
    head = "patch\\regions " + " ".join(f"{r:>8}" for r in regions)
    lines = [head]
    for p in patches:
        row = [f"{p:<14}"]
        for r in regions:
            value = cells.get((p, r))
            row.append(f"{value:>8.4f}" if value is not None else f"{'-':>8}")
        lines.append(" ".join(row))
    return lines


def format_report(report: dict, per_sample: bool = False) -> str:
    lines = [
        f"samples:   {report['n_samples']}",
        f"threshold: {report['threshold']:g}",
        f"mean IoU:  {report['mean_iou']:.4f}",
        f"mean loss: {report['mean_loss']:.4f}",
    ]
    if report.get("grid"):
        lines.append("")
        lines.extend(_grid_table(report["grid"]))
    if per_sample:
        lines.append("")
        lines.append(f"{'sample':<10} {'IoU':>8} {'loss':>10}")
        for s in report["per_sample"]:
            lines.append(f"{s['id']:<10} {s['iou']:>8.4f} {s['loss']:>10.4f}")
    return "\n".join(lines)
