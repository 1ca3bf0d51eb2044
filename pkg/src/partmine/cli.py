"""Command-line front end: mine, align, fuse-train, render, synth."""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .align import (
    AlignmentResult,
    PartDescriptorTable,
    downsample_mask,
    image_representatives,
    part_descriptor,
    serialize_alignment,
    spectral_cluster,
)
from .classify import fuse_features, predict, serialize_model, train_linear_svm
from .errors import ConfigError, PartMineError
from .pipeline import PipelineConfig, render_overlay, run_pipeline
from .synth import planted_stack
from .tensor import Tensor, global_average_pool, read_tensor, write_tensor

# keys a key=value config file may set, with their parsers
_CONFIG_KEYS = {
    "features": str,
    "out": str,
    "beta": float,
    "k_parts": int,
    "lambda": float,
    "alpha_mode": str,
    "connectivity": int,
    "objbox_frac": float,
    "max_pattern_len": int,
    "seed": int,
    "jobs": int,
    "image_size": int,
}


def parse_config_file(path: str) -> dict:
    """Plain key = value lines; '#' starts a comment; quotes optional."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc

    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return out


def _merged_settings(args) -> dict:
    """Flags beat config-file entries beat defaults."""
    settings = {
        "features": None, "out": None, "beta": 0.07, "k_parts": 4,
        "lambda": 0.25, "alpha_mode": "global", "connectivity": 8,
        "objbox_frac": 0.2, "max_pattern_len": 3, "seed": 0, "jobs": 1,
        "image_size": 448,
    }
    if getattr(args, "config", None):
        settings.update(parse_config_file(args.config))
    flag_map = {
        "features": "features", "out": "out", "beta": "beta",
        "k_parts": "k_parts", "lam": "lambda", "alpha_mode": "alpha_mode",
        "connectivity": "connectivity", "objbox_frac": "objbox_frac",
        "max_pattern_len": "max_pattern_len", "seed": "seed", "jobs": "jobs",
        "image_size": "image_size",
    }
    for attr, key in flag_map.items():
        value = getattr(args, attr, None)
        if value is not None:
            settings[key] = value
    for key in ("features", "out"):
        if not settings[key]:
            raise ConfigError(f"--{key} is required (flag or config file)")
    return settings


def _cmd_mine(args) -> int:
    s = _merged_settings(args)
    config = PipelineConfig(
        features_dir=s["features"], out_dir=s["out"], beta=s["beta"],
        k_parts=s["k_parts"], lam=s["lambda"], alpha_mode=s["alpha_mode"],
        connectivity=s["connectivity"], objbox_frac=s["objbox_frac"],
        max_pattern_len=s["max_pattern_len"], seed=s["seed"], jobs=s["jobs"],
        image_h=s["image_size"], image_w=s["image_size"],
        images=tuple(args.image or ()),
    )
    report = run_pipeline(config)
    for rec in report.records:
        if rec.status == "ok":
            note = f" ({'; '.join(rec.warnings)})" if rec.warnings else ""
            print(f"ok     {rec.stem}  {rec.seconds:.3f}s{note}")
        else:
            print(f"failed {rec.stem}  {rec.error}")
    print(f"{report.ok_count}/{len(report.records)} images localized; "
          f"summary: {report.summary_path}")
    return report.exit_code


def _align_features(features_dir: str, stem: str) -> Tensor:
    """Feature tensor used for descriptors; the conv5 export wins if present."""
    for suffix in (".conv5.npy", ".relu5.npy", ".npy"):
        path = os.path.join(features_dir, stem + suffix)
        if os.path.exists(path):
            return read_tensor(path)
    raise ConfigError(f"no feature tensor for {stem!r} in {features_dir}")


def _load_layouts(layouts_dir: str) -> list[tuple[str, dict]]:
    try:
        names = sorted(n for n in os.listdir(layouts_dir)
                       if n.endswith(".layout.json"))
    except OSError as exc:
        raise ConfigError(f"cannot list layouts dir {layouts_dir}: {exc}") from exc
    if not names:
        raise ConfigError(f"no .layout.json files in {layouts_dir}")
    out = []
    for name in names:
        path = os.path.join(layouts_dir, name)
        try:
            with open(path, "r", encoding="utf-8") as fh:
                out.append((name[: -len(".layout.json")], json.load(fh)))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read layout {path}: {exc}") from exc
    return out


def _box_mask(box, size: int) -> np.ndarray:
    x, y, w, h = (int(v) for v in box)
    mask = np.zeros((size, size), dtype=np.uint8)
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + w, size), min(y + h, size)
    if x1 > x0 and y1 > y0:
        mask[y0:y1, x0:x1] = 1
    return mask


def _descriptor_table(features_dir: str, layouts: list[tuple[str, dict]],
                      image_size: int) -> PartDescriptorTable:
    rows = []
    dims = None
    for stem, doc in layouts:
        feats = _align_features(features_dir, stem)
        if dims is None:
            dims = feats.dims
        fh, fw = feats.spatial
        for i, part in enumerate(doc["parts"]):
            mask = downsample_mask(_box_mask(part["box"], image_size), fh, fw)
            rows.append((stem, i, part_descriptor(feats, mask)))
    return PartDescriptorTable(rows=tuple(rows), feature_dims=dims)


def _cmd_align(args) -> int:
    layouts = _load_layouts(args.layouts)
    k = args.k_groups or max(len(doc["parts"]) for _, doc in layouts)
    table = _descriptor_table(args.features, layouts, args.image_size)
    result = spectral_cluster(table, k, seed=args.seed)
    payload = serialize_alignment(result)
    with open(args.out, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    sizes = ", ".join(str(s) for s in result.group_sizes)
    print(f"{len(table.rows)} parts -> {k} groups (sizes {sizes}); wrote {args.out}")
    return 0


def _read_labels(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read labels file {path}: {exc}") from exc
    labels = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 1)
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 'stem label'")
        labels[parts[0]] = parts[1].strip()
    return labels


def _cmd_fuse_train(args) -> int:
    layouts = _load_layouts(args.layouts)
    labels_by_stem = _read_labels(args.labels)
    missing = [stem for stem, _ in layouts if stem not in labels_by_stem]
    if missing:
        raise ConfigError(f"labels file has no entry for: {', '.join(missing)}")

    counts = {len(doc["parts"]) for _, doc in layouts}
    if len(counts) != 1:
        raise ConfigError(f"layouts disagree on part count: {sorted(counts)}")
    k = counts.pop()
    table = _descriptor_table(args.features, layouts, args.image_size)

    part_order: dict[str, list[int]] = {stem: list(range(k)) for stem, _ in layouts}
    if args.alignment:
        try:
            with open(args.alignment, "r", encoding="utf-8") as fh:
                labels_list = json.load(fh)["labels"]
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"cannot read alignment {args.alignment}: {exc}") from exc
        if len(labels_list) != len(table.rows):
            raise ConfigError("alignment labels do not match layout count")
        sizes = np.bincount(np.asarray(labels_list), minlength=k)
        result = AlignmentResult(labels=tuple(int(v) for v in labels_list),
                                 group_sizes=tuple(int(v) for v in sizes))
        reps = image_representatives(table, result)
        for si, (stem, _) in enumerate(layouts):
            order = []
            for g in range(k):
                row = reps.get((stem, g))
                # an image missing from a group keeps its positional part
                order.append(table.rows[row][1] if row is not None else g)
            part_order[stem] = order

    x, y = [], []
    for si, (stem, doc) in enumerate(layouts):
        feats = _align_features(args.features, stem)
        fh_, fw = feats.spatial
        blocks = [global_average_pool(feats)]
        obj_mask = downsample_mask(_box_mask(doc["object_box"], args.image_size), fh_, fw)
        blocks.append(part_descriptor(feats, obj_mask))
        descriptors = {table.rows[si * k + i][1]: table.rows[si * k + i][2]
                       for i in range(len(doc["parts"]))}
        for i in part_order[stem]:
            blocks.append(descriptors[i])
        x.append(fuse_features(blocks))
        y.append(labels_by_stem[stem])

    model = train_linear_svm(x, y, c_reg=args.c_reg, seed=args.seed)
    with open(args.out, "w", encoding="ascii") as fh:
        json.dump(serialize_model(model), fh, indent=2)
        fh.write("\n")
    hits = sum(predict(model, f.vector) == lab for f, lab in zip(x, y))
    print(f"trained on {len(x)} images, {len(model.classes)} classes; "
          f"train accuracy {hits}/{len(x)}; wrote {args.out}")
    return 0


def _cmd_render(args) -> int:
    image = read_tensor(args.image)
    try:
        with open(args.layout, "r", encoding="utf-8") as fh:
            layout = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read layout {args.layout}: {exc}") from exc
    render_overlay(image, layout, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    for i in range(args.count):
        stack, truth = planted_stack(args.seed + i)
        stem = f"planted_{i:04d}"
        write_tensor(stack, os.path.join(args.out, stem + ".npy"))
        doc = {
            "grid": list(truth.grid),
            "image_dims": list(truth.image_dims),
            "group_cells": [list(c) for c in truth.group_cells],
            "noise_items": list(truth.noise_items),
            "centers_feature": [list(c) for c in truth.centers_feature],
            "centers_image": [list(c) for c in truth.centers_image],
        }
        with open(os.path.join(args.out, stem + ".truth.json"), "w",
                  encoding="ascii") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    print(f"wrote {args.count} planted stack(s) under {args.out}")
    return 0


def _add_mine_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--features", help="directory of feature tensor files")
    p.add_argument("--out", help="output directory")
    p.add_argument("--beta", type=float, help="minimum support threshold")
    p.add_argument("--k-parts", dest="k_parts", type=int, help="parts per image")
    p.add_argument("--lambda", dest="lam", type=float, help="part side fraction")
    p.add_argument("--alpha-mode", dest="alpha_mode", choices=("global", "per-map"))
    p.add_argument("--connectivity", type=int, choices=(4, 8))
    p.add_argument("--objbox-frac", dest="objbox_frac", type=float,
                   help="object box binarization fraction of the peak")
    p.add_argument("--max-pattern-len", dest="max_pattern_len", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker threads")
    p.add_argument("--image-size", dest="image_size", type=int,
                   help="square image side the support map is upsampled to")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--image", action="append",
                   help="restrict to this image stem (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="partmine",
        description="Mine discriminative mid-level parts from CNN activation stacks.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="localize parts for every image")
    _add_mine_flags(p)
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("align", help="group mined parts across images")
    p.add_argument("--features", required=True)
    p.add_argument("--layouts", required=True, help="directory of .layout.json files")
    p.add_argument("--out", required=True, help="alignment JSON path")
    p.add_argument("--k-groups", dest="k_groups", type=int, default=0,
                   help="number of groups (default: parts per image)")
    p.add_argument("--image-size", dest="image_size", type=int, default=448)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_align)

    p = sub.add_parser("fuse-train", help="fuse descriptors and train the classifier")
    p.add_argument("--features", required=True)
    p.add_argument("--layouts", required=True)
    p.add_argument("--labels", required=True, help="file of 'stem label' lines")
    p.add_argument("--alignment", help="alignment JSON from the align step")
    p.add_argument("--out", required=True, help="model JSON path")
    p.add_argument("--c-reg", dest="c_reg", type=float, default=1.0)
    p.add_argument("--image-size", dest="image_size", type=int, default=448)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_fuse_train)

    p = sub.add_parser("render", help="draw a layout onto an image tensor")
    p.add_argument("--image", required=True, help="3xHxW RGB tensor file")
    p.add_argument("--layout", required=True, help="layout JSON")
    p.add_argument("--out", required=True, help="PPM output path")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("synth", help="generate planted synthetic stacks")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PartMineError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
