"""Batched activation dumping with a run manifest.

One invocation decodes a list of images, forwards them through the backbone
in batches, and writes one ``<stem>.<layer>.npy`` file per image and tapped
layer plus a ``manifest.json`` describing the run.  Decode failures are
recorded per image and do not abort the run; the pool5 tensor is written at
its native 14x14 geometry (consumers decide whether to resize it).
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np
import torch

from .backbone import LAYER_STRIDES, LAYER_TAPS, load_backbone, run_taps
from .errors import ConfigError, DecodeFailure, ModelLoadFailure
from .images import load_rgb, normalize

VALID_INPUT_SIZES = (224, 448)
ELEMENT_TYPE = "float32"


@dataclass(frozen=True)
class ImageEntry:
    """Outcome of one input image."""

    stem: str
    status: str                      # "ok" or "failed"
    outputs: dict[str, str] = field(default_factory=dict)
    error: str | None = None


@dataclass(frozen=True)
class ExtractionManifest:
    """What a run produced: backbone, taps, geometry, and per-image files."""

    model: str
    layers: tuple[str, ...]
    input_size: int
    element_type: str
    images: tuple[ImageEntry, ...]

    @property
    def ok_count(self) -> int:
        return sum(1 for entry in self.images if entry.status == "ok")

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "layers": list(self.layers),
            "input_size": self.input_size,
            "element_type": self.element_type,
            "images": [
                {
                    "image": entry.stem,
                    "status": entry.status,
                    "outputs": dict(entry.outputs),
                    **({"error": entry.error} if entry.error else {}),
                }
                for entry in self.images
            ],
        }


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _check_request(image_paths, layers, input_size, batch_size) -> None:
    if not image_paths:
        raise ConfigError("no input images given")
    if not layers:
        raise ConfigError("no layers requested")
    if len(set(layers)) != len(layers):
        raise ConfigError(f"duplicate layer in {list(layers)}")
    for name in layers:
        if name not in LAYER_TAPS:
            raise ConfigError(
                f"unknown layer {name!r}; choose from {sorted(LAYER_TAPS)}")
    if input_size not in VALID_INPUT_SIZES:
        raise ConfigError(
            f"input size must be one of {VALID_INPUT_SIZES}, got {input_size}")
    if batch_size < 1:
        raise ConfigError(f"batch size must be >= 1, got {batch_size}")
    stems = [_stem(p) for p in image_paths]
    for stem in stems:
        if stems.count(stem) > 1:
            raise ConfigError(f"two inputs share the output stem {stem!r}")


def _write(path: str, array: np.ndarray) -> None:
    np.save(path, np.ascontiguousarray(array, dtype=np.float32),
            allow_pickle=False)


def extract_features(image_paths, out_dir, *, model_id: str = "vgg16",
                     layers: tuple[str, ...] = ("relu5", "pool5"),
                     input_size: int = 448, weights: str = "none",
                     batch_size: int = 4,
                     dump_images: bool = False) -> ExtractionManifest:
    """Dump the requested activation tensors for every decodable image.

    Returns the manifest, which is also written to ``out_dir/manifest.json``
    after all tensor files exist.  ``dump_images`` additionally writes each
    resized (3, S, S) RGB frame as ``<stem>.image.npy`` in [0, 255].
    """
    layers = tuple(layers)
    _check_request(image_paths, layers, input_size, batch_size)
    trunk = load_backbone(model_id, weights)
    os.makedirs(out_dir, exist_ok=True)

    decoded: list[tuple[str, np.ndarray]] = []
    failures: dict[str, str] = {}
    order: list[str] = []
    for path in image_paths:
        stem = _stem(path)
        order.append(stem)
        try:
            decoded.append((stem, load_rgb(path, input_size)))
        except DecodeFailure as exc:
            failures[stem] = str(exc)

    outputs: dict[str, dict[str, str]] = {}
    for start in range(0, len(decoded), batch_size):
        chunk = decoded[start:start + batch_size]
        batch = torch.from_numpy(
            np.stack([normalize(rgb) for _, rgb in chunk]))
        taps = run_taps(trunk, batch, layers)
        for name in layers:
            want = input_size // LAYER_STRIDES[name]
            got = tuple(taps[name].shape[1:])
            if got != (512, want, want):
                raise ModelLoadFailure(
                    f"layer {name} produced {got}, expected (512, {want}, {want})")
        for row, (stem, rgb) in enumerate(chunk):
            files = {}
            for name in layers:
                filename = f"{stem}.{name}.npy"
                _write(os.path.join(out_dir, filename), taps[name][row].numpy())
                files[name] = filename
            if dump_images:
                filename = f"{stem}.image.npy"
                _write(os.path.join(out_dir, filename), rgb)
                files["image"] = filename
            outputs[stem] = files

    manifest = ExtractionManifest(
        model=model_id,
        layers=layers,
        input_size=input_size,
        element_type=ELEMENT_TYPE,
        images=tuple(
            ImageEntry(stem=stem, status="failed", error=failures[stem])
            if stem in failures
            else ImageEntry(stem=stem, status="ok", outputs=outputs[stem])
            for stem in order
        ),
    )
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="ascii") as fh:
        json.dump(manifest.to_json(), fh, indent=2)
        fh.write("\n")
    return manifest
