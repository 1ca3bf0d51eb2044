import pytest
import torch
import torch.nn.functional as F

from featdump import LAYER_TAPS, load_backbone, run_taps
from featdump.errors import ConfigError, ModelLoadFailure


def normalized_batch(side: int) -> torch.Tensor:
    gen = torch.Generator().manual_seed(3)
    return torch.randn((1, 3, side, side), generator=gen)


class TestLayerTaps:
    def test_tap_indices_name_the_right_module_kinds(self, trunk):
        modules = list(trunk)
        assert isinstance(modules[LAYER_TAPS["conv5"]], torch.nn.Conv2d)
        assert isinstance(modules[LAYER_TAPS["relu5"]], torch.nn.ReLU)
        assert isinstance(modules[LAYER_TAPS["pool5"]], torch.nn.MaxPool2d)

    def test_shapes_at_224(self, trunk):
        taps = run_taps(trunk, normalized_batch(224), ("conv5", "relu5", "pool5"))
        assert tuple(taps["conv5"].shape) == (1, 512, 14, 14)
        assert tuple(taps["relu5"].shape) == (1, 512, 14, 14)
        assert tuple(taps["pool5"].shape) == (1, 512, 7, 7)

    def test_relu5_is_rectified_conv5(self, trunk):
        taps = run_taps(trunk, normalized_batch(224), ("conv5", "relu5"))
        assert taps["conv5"].min().item() < 0
        assert torch.equal(taps["relu5"], taps["conv5"].clamp(min=0))

    def test_pool5_is_max_pooled_relu5(self, trunk):
        taps = run_taps(trunk, normalized_batch(224), ("relu5", "pool5"))
        assert torch.equal(taps["pool5"], F.max_pool2d(taps["relu5"], 2, 2))

    def test_unknown_layer_rejected(self, trunk):
        with pytest.raises(ConfigError):
            run_taps(trunk, normalized_batch(224), ("relu5", "fc7"))


class TestLoadBackbone:
    def test_unknown_model_rejected(self):
        with pytest.raises(ModelLoadFailure):
            load_backbone("resnet50", weights="none")

    def test_random_init_is_repeatable(self, trunk):
        again = load_backbone("vgg16", weights="none")
        batch = normalized_batch(224)
        first = run_taps(trunk, batch, ("pool5",))["pool5"]
        second = run_taps(again, batch, ("pool5",))["pool5"]
        assert torch.equal(first, second)

    def test_state_dict_path_is_applied(self, trunk, tmp_path):
        zeroed = {key: torch.zeros_like(value)
                  for key, value in trunk.state_dict().items()}
        path = tmp_path / "zeroed.pt"
        torch.save(zeroed, path)
        loaded = load_backbone("vgg16", weights=str(path))
        taps = run_taps(loaded, normalized_batch(224), ("pool5",))
        assert torch.count_nonzero(taps["pool5"]).item() == 0

    def test_missing_weights_file_rejected(self, tmp_path):
        with pytest.raises(ModelLoadFailure):
            load_backbone("vgg16", weights=str(tmp_path / "nope.pt"))

    def test_garbage_weights_file_rejected(self, tmp_path):
        path = tmp_path / "junk.pt"
        path.write_bytes(b"this is not a state dict")
        with pytest.raises(ModelLoadFailure):
            load_backbone("vgg16", weights=str(path))
