"""Dump VGG-16 stage-5 activations and resized images as NPY files."""

from .backbone import LAYER_STRIDES, LAYER_TAPS, load_backbone, run_taps
from .errors import ConfigError, DecodeFailure, FeatDumpError, ModelLoadFailure
from .extract import (
    ELEMENT_TYPE,
    VALID_INPUT_SIZES,
    ExtractionManifest,
    ImageEntry,
    extract_features,
)
from .images import IMAGENET_MEAN, IMAGENET_STD, load_rgb, normalize

__all__ = [
    "ELEMENT_TYPE",
    "IMAGENET_MEAN",
    "IMAGENET_STD",
    "LAYER_STRIDES",
    "LAYER_TAPS",
    "VALID_INPUT_SIZES",
    "ConfigError",
    "DecodeFailure",
    "ExtractionManifest",
    "FeatDumpError",
    "ImageEntry",
    "ModelLoadFailure",
    "extract_features",
    "load_backbone",
    "load_rgb",
    "normalize",
    "run_taps",
]
