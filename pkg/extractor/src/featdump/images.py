"""Image decoding and backbone preprocessing."""
from __future__ import annotations

import numpy as np
from PIL import Image

from .errors import DecodeFailure

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)


def load_rgb(path: str, side: int) -> np.ndarray:
    """Decode an image and resize the whole frame to ``side`` x ``side``.

    No cropping: aspect ratio is sacrificed so every input pixel contributes.
    Returns a (3, side, side) float32 array in [0, 255].
    """
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB").resize((side, side), Image.BILINEAR)
    except Exception as exc:
        raise DecodeFailure(f"{path}: {exc}") from exc
    return np.asarray(rgb, dtype=np.float32).transpose(2, 0, 1)


def normalize(rgb: np.ndarray) -> np.ndarray:
    """Scale a (3, H, W) [0, 255] array to the backbone's input statistics."""
    mean = np.asarray(IMAGENET_MEAN, dtype=np.float32).reshape(3, 1, 1)
    std = np.asarray(IMAGENET_STD, dtype=np.float32).reshape(3, 1, 1)
    return (rgb / np.float32(255.0) - mean) / std
