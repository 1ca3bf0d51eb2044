"""Batch localization: feature tensors in, layout JSON files out.

Per image the chain is threshold -> transactions -> frequent patterns ->
support map -> upsample -> largest component -> k-means centers -> square
part masks, plus a thresholded object box.  Images are independent, so a
worker pool may process them concurrently; files are written from the main
thread in input order so outputs do not depend on the worker count.
"""
from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, IoFailure, PartMineError, ShapeMismatch
from .localize import (
    PartLayout,
    build_support_map,
    derive_part_layout,
    extract_largest_component,
    find_part_centers,
    object_box,
    upsample_support_map,
)
from .mining import apriori
from .tensor import Tensor, bilinear_resize, read_tensor
from .transactions import build_transactions, compute_threshold

ALPHA_MODES = ("global", "per-map")

# one part layout document per image
LAYOUT_SCHEMA = {
    "type": "object",
    "required": ["image", "object_box", "side", "parts"],
    "properties": {
        "image": {"type": "string"},
        "object_box": {
            "type": "array", "minItems": 4, "maxItems": 4,
            "items": {"type": "integer"},
        },
        "side": {"type": "integer", "minimum": 1},
        "parts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["center", "box"],
                "properties": {
                    "center": {
                        "type": "array", "minItems": 2, "maxItems": 2,
                        "items": {"type": "integer"},
                    },
                    "box": {
                        "type": "array", "minItems": 4, "maxItems": 4,
                        "items": {"type": "integer"},
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class PipelineConfig:
    features_dir: str
    out_dir: str
    beta: float = 0.07
    k_parts: int = 4
    lam: float = 0.25
    alpha_mode: str = "global"
    connectivity: int = 8
    objbox_frac: float = 0.2
    max_pattern_len: int = 3
    seed: int = 0
    jobs: int = 1
    image_h: int = 448
    image_w: int = 448
    images: tuple[str, ...] = ()    # explicit stems; empty means scan features_dir

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ConfigError(f"beta must be in (0,1], got {self.beta}")
        if not 0 < self.lam <= 1:
            raise ConfigError(f"lambda must be in (0,1], got {self.lam}")
        if self.k_parts < 1:
            raise ConfigError(f"k-parts must be >= 1, got {self.k_parts}")
        if self.alpha_mode not in ALPHA_MODES:
            raise ConfigError(f"alpha-mode must be one of {ALPHA_MODES}, got {self.alpha_mode!r}")
        if self.connectivity not in (4, 8):
            raise ConfigError(f"connectivity must be 4 or 8, got {self.connectivity}")
        if not 0 < self.objbox_frac < 1:
            raise ConfigError(f"objbox-frac must be in (0,1), got {self.objbox_frac}")
        if self.max_pattern_len < 1:
            raise ConfigError(f"max-pattern-len must be >= 1, got {self.max_pattern_len}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.image_h < 1 or self.image_w < 1:
            raise ConfigError("image dims must be >= 1")


@dataclass(frozen=True)
class ImageRecord:
    stem: str
    status: str                      # "ok" | "failed"
    seconds: float
    warnings: tuple[str, ...] = ()
    error: str | None = None
    layout: PartLayout | None = None
    json_bytes: bytes = b""
    layout_path: str | None = None


@dataclass(frozen=True)
class PipelineReport:
    records: tuple[ImageRecord, ...]
    summary_path: str

    @property
    def ok_count(self) -> int:
        return sum(1 for r in self.records if r.status == "ok")

    @property
    def exit_code(self) -> int:
        # partial failures are tolerated; only a fully failed run is an error
        return 1 if self.records and self.ok_count == 0 else 0


def _scan_stems(features_dir: str) -> list[str]:
    stems = set()
    try:
        names = os.listdir(features_dir)
    except OSError as exc:
        raise ConfigError(f"cannot list features dir {features_dir}: {exc}") from exc
    for name in names:
        if not name.endswith(".npy"):
            continue
        if name.endswith(".relu5.npy") or name.endswith(".pool5.npy"):
            stems.add(name[:-10])
        else:
            stems.add(name[:-4])
    return sorted(stems)


def _resolve_inputs(features_dir: str, stem: str) -> tuple[str, ...]:
    """Paths for one stem: a relu5/pool5 pair, or a single premade stack."""
    relu = os.path.join(features_dir, stem + ".relu5.npy")
    pool = os.path.join(features_dir, stem + ".pool5.npy")
    single = os.path.join(features_dir, stem + ".npy")
    if os.path.exists(relu) or os.path.exists(pool):
        for p in (relu, pool):
            if not os.path.exists(p):
                raise ConfigError(f"missing feature tensor {p}")
        return (relu, pool)
    if not os.path.exists(single):
        raise ConfigError(f"missing feature tensor {single}")
    return (single,)


def load_stack(features_dir: str, stem: str) -> Tensor:
    """Read one image's activation stack.

    A relu5/pool5 pair is merged by resizing pool5 up to relu5's grid and
    stacking along channels; a bare <stem>.npy is used as-is.
    """
    paths = _resolve_inputs(features_dir, stem)
    tensors = [read_tensor(p) for p in paths]
    for p, t in zip(paths, tensors):
        if t.rank != 3:
            raise ShapeMismatch(f"{p}: expected a rank-3 stack, got rank {t.rank}")
    if len(tensors) == 1:
        return tensors[0]
    relu, pool = tensors
    if pool.spatial != relu.spatial:
        pool = bilinear_resize(pool, *relu.spatial)
    return Tensor(np.concatenate([relu.data, pool.data], axis=0))


def serialize_layout(stem: str, layout: PartLayout,
                     obj_box: tuple[int, int, int, int]) -> bytes:
    doc = {
        "image": stem,
        "object_box": [int(v) for v in obj_box],
        "side": int(layout.side),
        "parts": [
            {"center": [int(cx), int(cy)], "box": [int(v) for v in box]}
            for (cx, cy), box in zip(layout.centers, layout.part_boxes())
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("ascii")


def _process_one(config: PipelineConfig, stem: str) -> ImageRecord:
    start = time.perf_counter()
    warnings: list[str] = []
    try:
        stack = load_stack(config.features_dir, stem)
        thr = compute_threshold(stack, mode=config.alpha_mode)
        db = build_transactions(stack, thr)
        patterns = apriori(db, config.beta, max_len=config.max_pattern_len)
        smap = build_support_map(patterns, db)
        if smap.warning:
            warnings.append(smap.warning)
        up = upsample_support_map(smap, config.image_h, config.image_w)
        cc = extract_largest_component(up, config.connectivity)
        centers = find_part_centers(cc, config.k_parts, seed=config.seed)
        layout = derive_part_layout(centers, cc, config.lam,
                                    config.image_h, config.image_w)
        obox = object_box(cc, config.objbox_frac)
    except PartMineError as exc:
        return ImageRecord(stem=stem, status="failed",
                           seconds=time.perf_counter() - start,
                           warnings=tuple(warnings),
                           error=f"{type(exc).__name__}: {exc}")
    return ImageRecord(stem=stem, status="ok",
                       seconds=time.perf_counter() - start,
                       warnings=tuple(warnings), layout=layout,
                       json_bytes=serialize_layout(stem, layout, obox))


def run_pipeline(config: PipelineConfig) -> PipelineReport:
    stems = list(config.images) if config.images else _scan_stems(config.features_dir)
    if not stems:
        raise ConfigError(f"no feature tensors found in {config.features_dir}")
    for stem in stems:
        _resolve_inputs(config.features_dir, stem)   # fail fast on missing files

    os.makedirs(config.out_dir, exist_ok=True)
    if config.jobs == 1:
        records = [_process_one(config, stem) for stem in stems]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(lambda s: _process_one(config, s), stems))

    final = []
    for rec in records:
        if rec.status == "ok":
            path = os.path.join(config.out_dir, rec.stem + ".layout.json")
            with open(path, "wb") as fh:
                fh.write(rec.json_bytes)
            rec = replace(rec, layout_path=path)
        final.append(rec)

    summary = {
        "features_dir": config.features_dir,
        "out_dir": config.out_dir,
        "beta": config.beta,
        "k_parts": config.k_parts,
        "lambda": config.lam,
        "alpha_mode": config.alpha_mode,
        "connectivity": config.connectivity,
        "objbox_frac": config.objbox_frac,
        "max_pattern_len": config.max_pattern_len,
        "seed": config.seed,
        "ok": sum(1 for r in final if r.status == "ok"),
        "failed": sum(1 for r in final if r.status == "failed"),
        "images": [
            {
                "image": r.stem,
                "status": r.status,
                "seconds": round(r.seconds, 6),
                "warnings": list(r.warnings),
                **({"layout": os.path.basename(r.layout_path)} if r.layout_path else {}),
                **({"error": r.error} if r.error else {}),
            }
            for r in final
        ],
    }
    summary_path = os.path.join(config.out_dir, "summary.json")
    with open(summary_path, "w", encoding="ascii") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return PipelineReport(records=tuple(final), summary_path=summary_path)


# distinct fixed colors: object box first, then parts cycle the rest
_OBJECT_COLOR = (255, 40, 40)
_PART_COLORS = (
    (60, 220, 60),
    (70, 110, 255),
    (255, 220, 0),
    (230, 60, 230),
    (0, 210, 210),
    (255, 140, 0),
    (160, 90, 255),
    (140, 220, 140),
)


def _draw_box(pixels: np.ndarray, box, color, thickness: int = 2) -> None:
    h, w = pixels.shape[:2]
    x, y, bw, bh = (int(v) for v in box)
    x0, y0 = max(x, 0), max(y, 0)
    x1, y1 = min(x + bw - 1, w - 1), min(y + bh - 1, h - 1)
    if x1 < x0 or y1 < y0:
        return
    t = thickness
    col = np.array(color, dtype=np.uint8)
    pixels[y0:min(y0 + t, y1 + 1), x0:x1 + 1] = col
    pixels[max(y1 - t + 1, y0):y1 + 1, x0:x1 + 1] = col
    pixels[y0:y1 + 1, x0:min(x0 + t, x1 + 1)] = col
    pixels[y0:y1 + 1, max(x1 - t + 1, x0):x1 + 1] = col


def render_overlay(image: Tensor, layout, path) -> None:
    """Write a P6 PPM of the image with object and part boxes drawn on it.

    `layout` may be a PartLayout or a parsed layout JSON document.  Pixel
    values are clipped to [0, 255]; boxes are clamped at the borders.
    """
    if image.rank != 3 or image.dims[0] != 3:
        raise ShapeMismatch(f"need a 3xHxW RGB tensor, got dims {image.dims}")
    if isinstance(layout, PartLayout):
        obox = layout.object_box
        boxes = layout.part_boxes()
        frame = layout.masks[0].shape if layout.masks else image.spatial
        if frame != image.spatial:
            raise ShapeMismatch(
                f"layout frame {frame} does not match image {image.spatial}")
    else:
        try:
            obox = tuple(layout["object_box"])
            boxes = tuple(tuple(p["box"]) for p in layout["parts"])
        except (KeyError, TypeError) as exc:
            raise ShapeMismatch(f"bad layout document: {exc}") from exc

    pixels = np.clip(np.rint(image.data), 0, 255).astype(np.uint8)
    pixels = np.ascontiguousarray(pixels.transpose(1, 2, 0))   # HWC for PPM
    _draw_box(pixels, obox, _OBJECT_COLOR)
    for i, box in enumerate(boxes):
        _draw_box(pixels, box, _PART_COLORS[i % len(_PART_COLORS)])

    h, w = pixels.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(pixels.tobytes())
    except OSError as exc:
        raise IoFailure(f"cannot write overlay {path}: {exc}") from exc
