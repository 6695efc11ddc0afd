"""``irle`` command-line front end.

Exit codes: 0 success, 1 input/output failure, 2 invalid configuration or
inputs. Machine-readable results go to stdout as JSON; diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import BANDWIDTH_FLOOR, export_csv, kde, mean_luminance_set, pairwise_wasserstein, silverman_bandwidth
from .config import RunConfig, load_config
from .gafm import ConvParams, GafmParams, affine_params, gain_aware_block, gain_prior, load_weights, log_gain
from .image import load_image, luminance, save_image
from .losses import stage1_loss
from .pseudo_gt import generate_pseudo_gt
from .spectral import image_cfc, sisc_loss
from .subsample import neighbor_subsample

log = logging.getLogger("irle")

EXIT_OK, EXIT_IO, EXIT_INVALID = 0, 1, 2


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _write_json(path: Path, obj) -> None:
    path.write_text(_dump(obj) + "\n", encoding="utf-8")


def _normalize(m: np.ndarray) -> tuple[np.ndarray, dict]:
    """Min-max scale a map into [0, 1] for viewing; returns the map and its scale."""
    lo, hi = float(m.min()), float(m.max())
    span = hi - lo
    out = (m - lo) / span if span > 0 else np.zeros_like(m)
    return out, {"min": lo, "max": hi}


def _stats(y: np.ndarray) -> dict:
    return {"mean": float(y.mean()), "min": float(y.min()), "max": float(y.max())}


def _outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_pseudo_gt(args, cfg: RunConfig) -> int:
    img = load_image(args.input)
    if img.shape[2] != 3:
        raise ValueError(f"{args.input}: pseudo-GT needs an RGB image")
    b = generate_pseudo_gt(img, cfg.pseudo_gt)
    out = _outdir(args.out)
    save_image(b.pseudo_gt, out / "pseudo_gt.png")
    save_image(b.bright_image, out / "bright.png")
    save_image(b.wb_image, out / "wb.png")
    save_image(b.chroma_weight, out / "chroma_weight.png")
    scales = {}
    for name, m in (("gain_rough", b.rough_gain), ("gain_target", b.target_gain)):
        vis, scales[name] = _normalize(m)
        save_image(vis, out / f"{name}.png")
    _write_json(
        out / "bundle.json",
        {
            "input": os.fspath(args.input),
            "config": cfg.pseudo_gt.to_dict(),
            "gains": [float(g) for g in b.gains],
            "mask_fraction": float(b.mask.mean()),
            "luminance": {
                "input": _stats(luminance(img)),
                "bright": _stats(luminance(b.bright_image)),
                "pseudo_gt": _stats(luminance(b.pseudo_gt)),
            },
            "visualization_scales": scales,
        },
    )
    return EXIT_OK


def cmd_sisc(args, cfg: RunConfig) -> int:
    a, b = load_image(args.img1), load_image(args.img2)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    res = sisc_loss(a, b, cfg.sisc)
    print(
        _dump(
            {
                "total": res.total,
                "corr_term": res.corr_term,
                "amp_term": res.amp_term,
                "K": cfg.sisc.k_bands,
                "gamma": cfg.sisc.gamma,
            }
        )
    )
    return EXIT_OK


def cmd_cfc(args, cfg: RunConfig) -> int:
    img = load_image(args.input)
    k = args.k if args.k is not None else cfg.sisc.k_bands
    e, c = image_cfc(img, k, cfg.sisc.epsilon)
    out = _outdir(args.out)
    export_csv(c, out / "cfc.csv")
    export_csv(e, out / "bands.csv")
    print(_dump({"K": k, "trace": float(np.trace(c))}))
    return EXIT_OK


def estimate_illumination(r_hat: np.ndarray, i_low: np.ndarray, eps: float) -> np.ndarray:
    """Luminance ratio ``Y(I_low) / Y(R)`` clipped to [0, 1]."""
    return np.clip(luminance(i_low) / (luminance(r_hat) + eps), 0.0, 1.0)


def cmd_losses(args, cfg: RunConfig) -> int:
    r_hat, i_low = load_image(args.r_hat), load_image(args.i_low)
    if r_hat.shape != i_low.shape:
        raise ValueError(f"image shapes differ: {r_hat.shape} vs {i_low.shape}")
    if args.illum:
        l = luminance(load_image(args.illum))
        if l.shape != r_hat.shape[:2]:
            raise ValueError(f"illumination map size {l.shape} != image size {r_hat.shape[:2]}")
    else:
        l = estimate_illumination(r_hat, i_low, cfg.weights.epsilon)
    bundle = generate_pseudo_gt(i_low, cfg.pseudo_gt)
    pair = neighbor_subsample(r_hat, args.seed)
    report = stage1_loss(pair.sub1, pair.sub2, l, i_low, bundle, cfg.weights, cfg.sisc, r_full=r_hat)
    doc = report.to_dict()
    doc["seed"] = args.seed
    doc["generator"] = pair.generator
    print(_dump(doc))
    return EXIT_OK


def cmd_subsample(args, cfg: RunConfig) -> int:
    img = load_image(args.input)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        pair = neighbor_subsample(img, args.seed)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = _outdir(args.out)
    save_image(pair.sub1, out / "sub1.png")
    save_image(pair.sub2, out / "sub2.png")
    _write_json(out / "meta.json", pair.metadata())
    return EXIT_OK


def _png_files(d: Path) -> list[Path]:
    if not d.is_dir():
        raise FileNotFoundError(f"not a directory: {d}")
    files = sorted(p for p in d.iterdir() if p.suffix.lower() == ".png")
    if not files:
        raise ValueError(f"{d}: directory holds no PNG images")
    return files


def cmd_analyze(args, cfg: RunConfig) -> int:
    dirs = [Path(d) for d in args.dirs]
    labels = list(args.label or [])
    if len(labels) > len(dirs):
        raise ValueError(f"{len(labels)} labels given for {len(dirs)} directories")
    labels += [d.name or f"set{i}" for i, d in enumerate(dirs)][len(labels):]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate labels: {labels}")
    mode = args.mode or cfg.analysis.mode
    sets = [mean_luminance_set(_png_files(d), lab, mode) for d, lab in zip(dirs, labels)]
    out = _outdir(args.out)
    for s in sets:
        h = cfg.analysis.bandwidth
        if h is None:
            h = silverman_bandwidth(s.samples) if len(s) > 1 else BANDWIDTH_FLOOR
        export_csv(kde(s, cfg.analysis.grid_points, h), out / f"kde_{s.source}.csv")
    w = pairwise_wasserstein(sets)
    summary = {
        "labels": labels,
        "n": [len(s) for s in sets],
        "mode": mode,
        "wasserstein": w.tolist(),
    }
    _write_json(out / "wdist.json", summary)
    print(_dump(summary))
    return EXIT_OK


def demo_params(cfg: RunConfig, channels: int, seed: int) -> tuple[GafmParams, ConvParams]:
    """Seed 0 selects all-zero weights, which makes the block an exact identity."""
    if cfg.gafm.weights:
        params, conv = load_weights(cfg.gafm.weights)
        if params.channels != channels or conv.weight.shape[0] != channels:
            raise ValueError(f"weight file is for {params.channels} channels, image has {channels}")
        return params, conv
    if seed == 0:
        return GafmParams.zeros(channels, cfg.gafm.hidden), ConvParams.zeros(channels)
    return (
        GafmParams.random(channels, cfg.gafm.hidden, seed, cfg.gafm.scale),
        ConvParams.random(channels, seed + 1, cfg.gafm.scale),
    )


def cmd_gafm_demo(args, cfg: RunConfig) -> int:
    img = load_image(args.input)
    l_hat = luminance(load_image(args.l_hat))
    if l_hat.shape != img.shape[:2]:
        raise ValueError(f"illumination size {l_hat.shape} != image size {img.shape[:2]}")
    seed = args.seed if args.seed is not None else cfg.gafm.seed
    feats = img.transpose(2, 0, 1)
    params, conv = demo_params(cfg, feats.shape[0], seed)
    g_log = log_gain(gain_prior(l_hat, cfg.pseudo_gt.epsilon))
    out_feats = gain_aware_block(feats, g_log, params, conv)
    gamma, delta = affine_params(g_log, params)
    out = _outdir(args.out)
    save_image(out_feats.transpose(1, 2, 0), out / "modulated.png")
    scales = {}
    for name, m in (("gamma", gamma.mean(axis=0)), ("delta", delta.mean(axis=0))):
        vis, scales[name] = _normalize(m)
        save_image(vis, out / f"{name}.png")
    _write_json(
        out / "gafm_meta.json",
        {"seed": seed, "hidden": params.hidden, "weights": cfg.gafm.weights, "visualization_scales": scales},
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="irle", description="Internally referenced low-light enhancement toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON run configuration")
        p.set_defaults(func=func)
        return p

    p = add("pseudo-gt", cmd_pseudo_gt, "synthesize the pseudo ground truth and its intermediates")
    p.add_argument("input")
    p.add_argument("--out", required=True)

    p = add("sisc", cmd_sisc, "shift-invariant spectral correlation loss between two images")
    p.add_argument("img1")
    p.add_argument("img2")

    p = add("cfc", cmd_cfc, "band log-energies and cross-frequency correlation matrix")
    p.add_argument("input")
    p.add_argument("--k", type=int, default=None, help="number of radial bands")
    p.add_argument("--out", default=".")

    p = add("losses", cmd_losses, "Stage-1 loss report for a prediction and its low-light input")
    p.add_argument("r_hat")
    p.add_argument("i_low")
    p.add_argument("--illum", help="illumination map PNG; estimated from the images when omitted")
    p.add_argument("--seed", type=int, default=0)

    p = add("subsample", cmd_subsample, "split an image into two neighbor sub-samples")
    p.add_argument("input")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = add("analyze", cmd_analyze, "luminance KDE and pairwise Wasserstein distances across folders")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--label", action="append", help="name for the matching directory (repeatable)")
    p.add_argument("--mode", choices=("mean", "pixel"), default=None)
    p.add_argument("--out", required=True)

    p = add("gafm-demo", cmd_gafm_demo, "run one gain-aware block on an image (seed 0 = zero weights)")
    p.add_argument("input")
    p.add_argument("--l-hat", required=True, dest="l_hat", help="illumination estimate PNG")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        return args.func(args, cfg)
    except OSError as exc:
        print(f"irle: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"irle: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
