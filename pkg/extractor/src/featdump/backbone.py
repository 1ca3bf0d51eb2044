"""VGG-16 loading and stage-5 activation taps.

The taps are indices into ``torchvision.models.vgg16().features``: the last
stage-5 convolution output (pre-activation), the ReLU after it, and the
stage-5 max-pool.  At a 448x448 input they yield 512x28x28, 512x28x28 and
512x14x14 maps respectively.
"""
from __future__ import annotations

import torch
import torchvision

from .errors import ConfigError, ModelLoadFailure

LAYER_TAPS = {"conv5": 28, "relu5": 29, "pool5": 30}

# spatial stride of each tapped layer relative to the input image
LAYER_STRIDES = {"conv5": 16, "relu5": 16, "pool5": 32}

_INIT_SEED = 0


def load_backbone(model_id: str = "vgg16", weights: str = "none") -> torch.nn.Module:
    """Return the VGG-16 convolutional trunk in inference mode.

    ``weights`` selects the parameter source: ``"default"`` downloads the
    standard pretrained set, ``"none"`` keeps the architecture's random
    initialization (seeded, so repeat runs produce identical tensors), and
    any other value is read as a path to a saved state dict for either the
    full model or just its convolutional trunk.
    """
    if model_id != "vgg16":
        raise ModelLoadFailure(f"unsupported model {model_id!r}; only vgg16 is built in")
    if weights == "default":
        try:
            net = torchvision.models.vgg16(
                weights=torchvision.models.VGG16_Weights.IMAGENET1K_V1)
        except Exception as exc:
            raise ModelLoadFailure(f"pretrained weights unavailable: {exc}") from exc
    else:
        torch.manual_seed(_INIT_SEED)
        net = torchvision.models.vgg16(weights=None)
        if weights != "none":
            try:
                state = torch.load(weights, map_location="cpu", weights_only=True)
            except Exception as exc:
                raise ModelLoadFailure(f"cannot load weights from {weights}: {exc}") from exc
            try:
                if any(k.startswith("features.") for k in state):
                    net.load_state_dict(state)
                else:
                    net.features.load_state_dict(state)
            except (RuntimeError, KeyError) as exc:
                raise ModelLoadFailure(f"state dict does not fit vgg16: {exc}") from exc
    trunk = net.features.eval()
    trunk.requires_grad_(False)
    return trunk


def run_taps(trunk: torch.nn.Module, batch: torch.Tensor,
             layers: tuple[str, ...]) -> dict[str, torch.Tensor]:
    """Forward ``batch`` through the trunk, capturing the named taps.

    Execution stops at the deepest requested layer; the result maps each
    layer name to its (B, C, H, W) activation tensor.
    """
    for name in layers:
        if name not in LAYER_TAPS:
            raise ConfigError(
                f"unknown layer {name!r}; choose from {sorted(LAYER_TAPS)}")
    wanted = {LAYER_TAPS[name]: name for name in layers}
    taps: dict[str, torch.Tensor] = {}
    x = batch
    with torch.inference_mode():
        for index, module in enumerate(trunk):
            x = module(x)
            if index in wanted:
                # clone: the trunk's ReLUs run in place and would otherwise
                # rectify an already-captured pre-activation tensor
                taps[wanted[index]] = x.clone()
            if index == max(wanted):
                break
    return taps
