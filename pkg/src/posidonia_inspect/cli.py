"""Command line front end for the inspection pipeline.

Every subcommand is a thin, validated wrapper over one library call and
writes files in the module's native formats.  Exit codes: 0 on success,
1 when inputs fail validation, 2 when the work itself errors out.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from collections import Counter
from dataclasses import replace
from pathlib import Path

import numpy as np

from .darkpatch import DetectorConfig, detect_dark_patches, report_lines
from .dataset import (
    SplitSpec,
    augment_image,
    augment_mask,
    enhance_for_rocks,
    parse_annotation,
    rasterize_annotation,
    split_sizes,
)
from .imaging import read_pnm, write_pnm
from .mission import run_mission, write_mission_log
from .presets import (
    blocks_scenario,
    empty_scenario,
    five_patch_scenario,
    gen_lawnmower,
    ring_meadow_scenario,
)
from .segmentation import NUM_CLASSES, BaselineSegmenter, mean_iou, read_mask, write_mask
from .world import OracleSegmenter, Scenario, load_scenario, render

log = logging.getLogger("posinspect")

SCENARIO_PRESETS = {
    "five-patch": five_patch_scenario,
    "ring-meadow": ring_meadow_scenario,
    "blocks": blocks_scenario,
    "empty": empty_scenario,
}


class CommandError(Exception):
    """Bad input or configuration; reported and mapped to exit code 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for runtime errors
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _floats(text: str, count: int, what: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        values = tuple(float(p) for p in parts)
    except ValueError:
        raise CommandError(f"{what} must be numeric, got {text!r}") from None
    if len(values) != count:
        raise CommandError(f"{what} needs {count} values, got {len(values)}")
    return values


def _load_scenario_arg(name: str) -> Scenario:
    if name in SCENARIO_PRESETS:
        return SCENARIO_PRESETS[name]()
    if not os.path.isfile(name):
        presets = ", ".join(sorted(SCENARIO_PRESETS))
        raise CommandError(f"scenario not found: {name} (no such file; presets: {presets})")
    try:
        return load_scenario(name)
    except (OSError, ValueError) as exc:
        raise CommandError(str(exc)) from exc


def _load_image(path: str):
    if not os.path.isfile(path):
        raise CommandError(f"image not found: {path}")
    try:
        return read_pnm(path)
    except (OSError, ValueError) as exc:
        raise CommandError(f"{path}: {exc}") from exc


def _load_mask(path: str):
    try:
        return read_mask(path)
    except (OSError, ValueError) as exc:
        raise CommandError(f"{path}: {exc}") from exc


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommands


def cmd_survey_run(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    if args.seed is not None:
        scenario = replace(scenario, mission=replace(scenario.mission, seed=args.seed))
    backend = (
        OracleSegmenter(scenario) if args.backend == "oracle" else BaselineSegmenter()
    )
    out = _out_dir(args.out)

    mission_log = run_mission(scenario, backend, max_ticks=args.max_ticks)
    names = write_mission_log(scenario, mission_log, out)
    log.info("wrote %s to %s", ", ".join(names), out)

    kinds = Counter(e.kind for e in mission_log.events)
    print(
        "patches found {} tracked {} skipped {}".format(
            kinds.get("PATCH_DETECTED", 0),
            kinds.get("POSIDONIA_FOUND", 0),
            kinds.get("PATCH_SKIPPED_EXPLORED", 0),
        )
    )
    if not mission_log.completed:
        print(f"mission did not complete within {args.max_ticks} ticks", file=sys.stderr)
        return 2
    return 0


def cmd_detect(args) -> int:
    img = _load_image(args.image)
    try:
        config = DetectorConfig()
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    report = detect_dark_patches(img, config, vehicle_depth=args.depth)
    for line in report_lines(report):
        print(line)
    log.info("%d patches, %d excluded", len(report.patches), report.excluded_count)
    return 0


def cmd_enhance(args) -> int:
    img = _load_image(args.image)
    if not np.isfinite(args.gamma) or args.gamma <= 0.0:
        raise CommandError("gamma must be positive")
    write_pnm(enhance_for_rocks(img, args.gamma), args.out)
    return 0


def cmd_render(args) -> int:
    scenario = _load_scenario_arg(args.scenario)
    x, y, yaw, altitude = _floats(args.pose, 4, "--pose")
    if altitude <= 0.0:
        raise CommandError("pose altitude must be positive")
    img, mask = render(scenario, x, y, yaw, altitude)
    write_pnm(img, args.out)
    if args.mask_out:
        write_mask(mask, args.mask_out)
    return 0


def cmd_eval_iou(args) -> int:
    for d in (args.gt_dir, args.pred_dir):
        if not os.path.isdir(d):
            raise CommandError(f"not a directory: {d}")
    names = sorted(
        set(os.listdir(args.gt_dir)) & set(os.listdir(args.pred_dir))
    )
    names = [n for n in names if n.endswith(".pgm")]
    if not names:
        raise CommandError("no common .pgm mask files between the directories")
    classes = None
    if args.classes:
        try:
            codes = tuple(int(v) for v in args.classes.split(","))
        except ValueError:
            raise CommandError(f"--classes must be comma-separated integers, got {args.classes!r}") from None
        if any(not 0 <= c < NUM_CLASSES for c in codes):
            raise CommandError(f"class codes must lie in [0, {NUM_CLASSES - 1}]")
        classes = codes
    pairs = [
        (_load_mask(os.path.join(args.gt_dir, n)), _load_mask(os.path.join(args.pred_dir, n)))
        for n in names
    ]
    try:
        score = mean_iou(pairs, classes)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    print(f"mean {score:.6f}")
    return 0


def cmd_dataset_masks(args) -> int:
    if not os.path.isfile(args.annotations):
        raise CommandError(f"annotations not found: {args.annotations}")
    try:
        with open(args.annotations, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CommandError(f"{args.annotations}: {exc}") from exc
    items = payload if isinstance(payload, list) else [payload]
    try:
        annotations = [parse_annotation(obj) for obj in items]
    except ValueError as exc:
        raise CommandError(f"{args.annotations}: {exc}") from exc
    out = _out_dir(args.out)
    for ann in annotations:
        write_mask(rasterize_annotation(ann), out / f"{ann.image}.pgm")
    print(f"wrote {len(annotations)} masks")
    return 0


def cmd_dataset_split(args) -> int:
    if not os.path.isfile(args.list):
        raise CommandError(f"list file not found: {args.list}")
    with open(args.list, "r", encoding="utf-8") as fh:
        items = [line.rstrip("\n") for line in fh if line.strip()]
    train_frac, val_frac = _floats(args.fractions, 2, "--fractions")
    try:
        spec = SplitSpec(train_frac, val_frac, seed=args.seed)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    n_train, n_val, n_test = split_sizes(len(items), spec)
    print(f"{n_train} {n_val} {n_test}")
    if args.out:
        from .dataset import split as split_items

        out = _out_dir(args.out)
        for name, part in zip(("train", "val", "test"), split_items(items, spec)):
            (out / f"{name}.txt").write_text("".join(f"{it}\n" for it in part))
    return 0


def _sample_ops(rng: np.random.Generator) -> list[tuple]:
    ops: list[tuple] = []
    if rng.random() < 0.5:
        ops.append(("flip_h",))
    if rng.random() < 0.5:
        ops.append(("flip_v",))
    quarters = int(rng.integers(0, 4))
    if quarters:
        ops.append(("rotate90", quarters))
    if rng.random() < 0.5:
        ops.append(("zoom_crop", round(float(rng.uniform(0.6, 0.95)), 3)))
    return ops or [("flip_h",)]


def cmd_dataset_augment(args) -> int:
    pairs: list[tuple[str, str | None]] = []
    for item in args.pairs:
        image_path, sep, mask_path = item.partition(":")
        pairs.append((image_path, mask_path if sep else None))
    for image_path, mask_path in pairs:
        if not os.path.isfile(image_path):
            raise CommandError(f"image not found: {image_path}")
        if mask_path is not None and not os.path.isfile(mask_path):
            raise CommandError(f"mask not found: {mask_path}")
    out = _out_dir(args.out)
    rng = np.random.default_rng(args.seed)
    written = 0
    for image_path, mask_path in pairs:
        ops = _sample_ops(rng)
        stem = Path(image_path).stem
        write_pnm(augment_image(_load_image(image_path), ops), out / f"{stem}_aug.ppm")
        written += 1
        if mask_path is not None:
            write_mask(augment_mask(_load_mask(mask_path), ops), out / f"{stem}_aug.pgm")
            written += 1
        log.info("%s: %s", stem, ops)
    print(f"wrote {written} files")
    return 0


def cmd_gen_lawnmower(args) -> int:
    bounds = _floats(args.bounds, 4, "--bounds")
    try:
        waypoints = gen_lawnmower(bounds, args.spacing)
    except ValueError as exc:
        raise CommandError(str(exc)) from exc
    for x, y in waypoints:
        print(f"{x:.3f} {y:.3f}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="posinspect", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("survey-run", help="run a full mission and write its artifacts")
    p.add_argument("--scenario", required=True,
                   help=f"scenario file or preset ({', '.join(sorted(SCENARIO_PRESETS))})")
    p.add_argument("--backend", choices=("oracle", "baseline"), default="oracle")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--max-ticks", type=int, default=20000)
    p.set_defaults(func=cmd_survey_run)

    p = sub.add_parser("detect", help="report dark patches in one image")
    p.add_argument("image", help="PPM/PGM image")
    p.add_argument("--depth", type=float, default=0.0, help="vehicle depth for threshold scaling")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("enhance", help="equalize and gamma-correct one image")
    p.add_argument("image", help="PPM/PGM image")
    p.add_argument("--gamma", type=float, default=1.5)
    p.add_argument("--out", required=True, help="output PPM path")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("render", help="render one seafloor camera frame")
    p.add_argument("--scenario", required=True)
    p.add_argument("--pose", required=True, help="x,y,yaw,altitude")
    p.add_argument("--out", required=True, help="output PPM path")
    p.add_argument("--mask-out", default=None, help="also write the ground-truth PGM")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("eval-iou", help="mean IoU between two mask directories")
    p.add_argument("gt_dir")
    p.add_argument("pred_dir")
    p.add_argument("--classes", default=None, help="comma-separated class codes")
    p.set_defaults(func=cmd_eval_iou)

    p = sub.add_parser("dataset-masks", help="rasterize polygon annotations to PGM masks")
    p.add_argument("annotations", help="JSON annotation file (object or list)")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_dataset_masks)

    p = sub.add_parser("dataset-split", help="deterministic train/val/test split")
    p.add_argument("list", help="text file, one item per line")
    p.add_argument("--fractions", default="0.7,0.2", help="train,val fractions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write train/val/test lists here")
    p.set_defaults(func=cmd_dataset_split)

    p = sub.add_parser("dataset-augment", help="write seeded augmented copies")
    p.add_argument("pairs", nargs="+", metavar="IMAGE[:MASK]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_dataset_augment)

    p = sub.add_parser("gen-lawnmower", help="print lawnmower waypoints")
    p.add_argument("--bounds", required=True, help="x0,y0,x1,y1")
    p.add_argument("--spacing", type=float, required=True)
    p.set_defaults(func=cmd_gen_lawnmower)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - boundary: report, do not crash
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
