"""Command-line surface: transfer, pairs, and inspect subcommands.

Outputs are staged in a temporary directory inside the output directory and
renamed into place only after the whole run has succeeded, so a failing run
never leaves partial files behind. Every run writes a manifest.json that
echoes the resolved configuration and digests all inputs and outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from .errors import BoundsError, DimensionError, ExtractionError, FormatError
from .extraction import PatchBank, sample_rain_patches
from .imagecore import ImageBuffer, load_image, load_mask, save_image
from .manifest import build_manifest, file_entry, sha256_file, write_json
from .synthesis import (
    STREAM_BANK,
    STREAM_PAIRS,
    STREAM_TRANSFER,
    TransferConfig,
    derive_rng,
    generate_pairs,
    transfer,
)

SEED_ENV_VAR = "RAINWEAVE_SEED"

_FLAG_TO_FIELD = {
    "patch": "patch_size",
    "overlap": "overlap",
    "threshold": "coverage_threshold",
    "bank": "bank_count",
    "feather": "feather",
    "seed": "seed",
}
_CONFIG_FIELDS = set(_FLAG_TO_FIELD.values())


def _describe(exc: Exception) -> str:
    for cls, label in (
        (FormatError, "format error"),
        (DimensionError, "dimension error"),
        (BoundsError, "bounds error"),
        (ExtractionError, "extraction error"),
        (OSError, "I/O error"),
    ):
        if isinstance(exc, cls):
            return f"{label}: {exc}"
    return f"error: {exc}"


def _resolve_config(args: argparse.Namespace) -> TransferConfig:
    """Merge config sources: flags > config file > RAINWEAVE_SEED env > defaults."""
    values: dict = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file {args.config}: invalid JSON ({exc})") from exc
        if not isinstance(raw, dict):
            raise ValueError(f"config file {args.config}: expected a JSON object")
        unknown = sorted(set(raw) - _CONFIG_FIELDS)
        if unknown:
            raise ValueError(
                f"config file {args.config}: unknown keys {unknown}; "
                f"valid keys are {sorted(_CONFIG_FIELDS)}"
            )
        values.update(raw)
    if "seed" not in values and os.environ.get(SEED_ENV_VAR) is not None:
        text = os.environ[SEED_ENV_VAR]
        try:
            values["seed"] = int(text)
        except ValueError as exc:
            raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {text!r}") from exc
    for flag, fieldname in _FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[fieldname] = v
    return TransferConfig(**values)


def _load_inputs(args: argparse.Namespace):
    exemplar = load_image(args.exemplar)
    mask = load_mask(args.mask)
    targets = [load_image(p) for p in args.target]
    return exemplar, mask, targets


def _extract_bank(exemplar, mask, cfg: TransferConfig) -> PatchBank:
    return sample_rain_patches(
        exemplar,
        mask,
        cfg.patch_size,
        cfg.coverage_threshold,
        cfg.bank_count,
        derive_rng(cfg.seed, STREAM_BANK),
    )


def _ms(start: float) -> float:
    return round((time.perf_counter() - start) * 1000.0, 3)


def cmd_transfer(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    timing: dict = {}

    t = time.perf_counter()
    exemplar, mask, targets = _load_inputs(args)
    timing["load"] = _ms(t)

    names = [f"{Path(p).stem}_rain.png" for p in args.target]
    if len(set(names)) != len(names):
        raise ValueError(f"target stems collide in output names: {sorted(names)}")

    t = time.perf_counter()
    bank = _extract_bank(exemplar, mask, cfg)
    timing["extract"] = _ms(t)

    t = time.perf_counter()
    results = [
        transfer(target, bank, cfg, derive_rng(cfg.seed, STREAM_TRANSFER, i))
        for i, target in enumerate(targets)
    ]
    timing["transfer"] = _ms(t)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".rainweave-") as tmp:
        t = time.perf_counter()
        staged = []
        outputs = []
        for name, img in zip(names, results):
            staged_path = Path(tmp) / name
            save_image(img, staged_path)
            staged.append((staged_path, out_dir / name))
            outputs.append({"path": name, "sha256": sha256_file(staged_path)})
        timing["save"] = _ms(t)

        inputs = [
            file_entry(args.exemplar, role="exemplar"),
            file_entry(args.mask, role="mask"),
            *[file_entry(p, role="target") for p in args.target],
        ]
        manifest = build_manifest(__version__, cfg.seed, cfg.as_dict(), inputs, outputs, timing)
        staged_manifest = Path(tmp) / "manifest.json"
        write_json(manifest, staged_manifest)
        staged.append((staged_manifest, out_dir / "manifest.json"))

        for src, dst in staged:
            os.replace(src, dst)
    for _, dst in staged:
        print(f"wrote {dst}")
    return 0


def cmd_pairs(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    if args.count < 0:
        raise ValueError(f"--count must be >= 0, got {args.count}")
    timing: dict = {}

    t = time.perf_counter()
    exemplar, mask, targets = _load_inputs(args)
    timing["load"] = _ms(t)

    t = time.perf_counter()
    bank = _extract_bank(exemplar, mask, cfg)
    timing["extract"] = _ms(t)

    t = time.perf_counter()
    records = generate_pairs(targets, bank, args.count, cfg, derive_rng(cfg.seed, STREAM_PAIRS))
    timing["pairs"] = _ms(t)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory(dir=out_dir, prefix=".rainweave-") as tmp:
        t = time.perf_counter()
        pairs_tmp = Path(tmp) / "pairs"
        pairs_tmp.mkdir()
        staged = []
        outputs = []
        listed = []
        for k, rec in enumerate(records):
            clean_name = f"pairs/{k}_clean.png"
            rain_name = f"pairs/{k}_rain.png"
            save_image(ImageBuffer(rec.target_patch), Path(tmp) / clean_name)
            save_image(ImageBuffer(rec.synthetic_patch), Path(tmp) / rain_name)
            clean_sha = sha256_file(Path(tmp) / clean_name)
            rain_sha = sha256_file(Path(tmp) / rain_name)
            staged.append((Path(tmp) / clean_name, out_dir / clean_name))
            staged.append((Path(tmp) / rain_name, out_dir / rain_name))
            outputs.append({"path": clean_name, "sha256": clean_sha})
            outputs.append({"path": rain_name, "sha256": rain_sha})
            listed.append(
                {
                    "index": k,
                    "target": str(args.target[rec.target_index]),
                    "row": rec.target_ref.row,
                    "col": rec.target_ref.col,
                    "patch_size": rec.target_ref.size,
                    "residual_index": rec.residual_index,
                    "clean": clean_name,
                    "rain": rain_name,
                    "clean_sha256": clean_sha,
                    "rain_sha256": rain_sha,
                }
            )
        pairs_doc = {
            "tool_version": __version__,
            "seed": cfg.seed,
            "config": cfg.as_dict(),
            "records": listed,
        }
        staged_pairs_json = Path(tmp) / "pairs.json"
        write_json(pairs_doc, staged_pairs_json)
        staged.append((staged_pairs_json, out_dir / "pairs.json"))
        outputs.append({"path": "pairs.json", "sha256": sha256_file(staged_pairs_json)})
        timing["save"] = _ms(t)

        inputs = [
            file_entry(args.exemplar, role="exemplar"),
            file_entry(args.mask, role="mask"),
            *[file_entry(p, role="target") for p in args.target],
        ]
        manifest = build_manifest(__version__, cfg.seed, cfg.as_dict(), inputs, outputs, timing)
        staged_manifest = Path(tmp) / "manifest.json"
        write_json(manifest, staged_manifest)
        staged.append((staged_manifest, out_dir / "manifest.json"))

        (out_dir / "pairs").mkdir(exist_ok=True)
        for src, dst in staged:
            os.replace(src, dst)
    print(f"wrote {len(records)} pairs under {out_dir / 'pairs'}")
    print(f"wrote {out_dir / 'pairs.json'}")
    print(f"wrote {out_dir / 'manifest.json'}")
    return 0


def _montage(bank: PatchBank, limit: int = 64) -> ImageBuffer:
    """Tile residuals remapped to mid-gray (v/2 + 0.5) for visual checking."""
    n = min(len(bank), limit)
    tiles = math.ceil(math.sqrt(n))
    size = bank.patch_size
    canvas = np.full((tiles * size, tiles * size, bank.channels), 0.5)
    for k in range(n):
        r, c = divmod(k, tiles)
        canvas[r * size : (r + 1) * size, c * size : (c + 1) * size] = np.clip(
            bank.patches[k].data * 0.5 + 0.5, 0.0, 1.0
        )
    return ImageBuffer(canvas)


def cmd_inspect(args: argparse.Namespace) -> int:
    cfg = _resolve_config(args)
    exemplar = load_image(args.exemplar)
    mask = load_mask(args.mask)
    if (exemplar.height, exemplar.width) != (mask.height, mask.width):
        raise DimensionError(
            f"exemplar is {exemplar.height}x{exemplar.width} but "
            f"mask is {mask.height}x{mask.width}"
        )
    from .extraction import enumerate_valid_positions

    positions = enumerate_valid_positions(mask, cfg.patch_size, cfg.coverage_threshold)
    print(f"valid positions: {len(positions)}")
    print(f"mask coverage: {mask.data.mean():.6f}")
    if not positions:
        print("no valid patch positions at this threshold; no residual statistics")
        return 0

    sample_count = min(cfg.bank_count, 256)
    bank = sample_rain_patches(
        exemplar, mask, cfg.patch_size, cfg.coverage_threshold, sample_count,
        derive_rng(cfg.seed, STREAM_BANK),
    )
    stacked = np.stack([p.data for p in bank.patches])
    mins = stacked.min(axis=(0, 1, 2))
    maxs = stacked.max(axis=(0, 1, 2))
    stds = stacked.std(axis=(0, 1, 2))
    fmt = lambda vals: "[" + ", ".join(f"{v:.6g}" for v in vals) + "]"
    print(f"residual sample: {sample_count} patches of {cfg.patch_size} px")
    print(f"residual min per channel: {fmt(mins)}")
    print(f"residual max per channel: {fmt(maxs)}")
    print(f"residual stddev per channel: {fmt(stds)}")

    if args.montage:
        montage_path = Path(args.montage)
        montage_path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(
            dir=montage_path.parent, suffix=".png", prefix=".rainweave-"
        )
        os.close(fd)
        try:
            save_image(_montage(bank), tmp_name)
            os.replace(tmp_name, montage_path)
        except BaseException:
            os.unlink(tmp_name)
            raise
        print(f"wrote {montage_path}")
    return 0


def _add_config_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--patch", type=int, default=None, help="patch size in pixels (default 32)")
    sp.add_argument("--overlap", type=int, default=None,
                    help="overlap strip width (default patch/6 rounded, min 2)")
    sp.add_argument("--threshold", type=float, default=None,
                    help="min fraction of rain pixels in a sampled window (default 0.6)")
    sp.add_argument("--bank", type=int, default=None,
                    help="number of residual patches to extract (default 2000)")
    sp.add_argument("--feather", type=int, default=None,
                    help="seam feather radius in pixels, 0 = hard cut (default 1)")
    sp.add_argument("--seed", type=int, default=None,
                    help=f"64-bit unsigned RNG seed (fallback: ${SEED_ENV_VAR}, then 0)")
    sp.add_argument("--config", default=None,
                    help="JSON config file with TransferConfig field names; flags win")


def _add_io_flags(sp: argparse.ArgumentParser, targets: bool = True) -> None:
    sp.add_argument("--exemplar", required=True, help="exemplar rain image (8-bit PNG)")
    sp.add_argument("--mask", required=True, help="rain mask PNG (max channel code > 127 = rain)")
    if targets:
        sp.add_argument("--target", action="append", required=True,
                        help="target non-rain PNG; repeat the flag for multiple targets")
        sp.add_argument("--out", default=".", help="output directory (default: current dir)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rainweave",
        description="Transfer rain structure from an exemplar photo onto clean images.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transfer", help="synthesize rain over whole target images")
    _add_io_flags(t)
    _add_config_flags(t)
    t.set_defaults(func=cmd_transfer)

    p = sub.add_parser("pairs", help="emit random (clean, rain) patch pairs for training")
    _add_io_flags(p)
    p.add_argument("--count", type=int, required=True, help="number of pairs to generate")
    _add_config_flags(p)
    p.set_defaults(func=cmd_pairs)

    i = sub.add_parser("inspect", help="report mask coverage and residual statistics")
    _add_io_flags(i, targets=False)
    i.add_argument("--montage", default=None, help="write a residual patch montage PNG here")
    _add_config_flags(i)
    i.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, ValueError, FormatError, DimensionError, BoundsError, ExtractionError) as exc:
        print(_describe(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
