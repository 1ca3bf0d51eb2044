"""Tensor file round trips, bilinear resizing, pooling, and mask algebra."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from partmine import (
    IoFailure,
    MalformedHeader,
    ShapeMismatch,
    Tensor,
    TruncatedPayload,
    UnsupportedElementType,
    ZeroExtent,
    ZeroVector,
    bilinear_resize,
    global_average_pool,
    l2_normalize,
    masked_multiply,
    read_tensor,
    write_tensor,
)


def roundtrip(t: Tensor, tmp_path) -> Tensor:
    path = tmp_path / "t.npy"
    write_tensor(t, path)
    return read_tensor(path)


class TestTensorFiles:
    def test_roundtrip_flat_zeros(self, tmp_path):
        t = Tensor(np.zeros(3, dtype=np.float32))
        back = roundtrip(t, tmp_path)
        assert back.dims == (3,)
        assert np.array_equal(back.data, t.data)

    def test_roundtrip_random_stack_is_bit_exact(self, tmp_path, rng):
        t = Tensor(rng.random((512, 14, 14)).astype(np.float32))
        back = roundtrip(t, tmp_path)
        assert back.dims == (512, 14, 14)
        assert np.array_equal(back.data, t.data)

    def test_reads_plain_numpy_file(self, tmp_path):
        path = tmp_path / "np.npy"
        np.save(path, np.array([[1, 2], [3, 4]], dtype=np.float32))
        t = read_tensor(path)
        assert t.dims == (2, 2)
        assert t.data.ravel().tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_bad_magic_names_offset(self, tmp_path):
        path = tmp_path / "bad.npy"
        path.write_bytes(b"NOTNPY" + b"\x00" * 20)
        with pytest.raises(MalformedHeader) as err:
            read_tensor(path)
        assert err.value.offset == 0

    def test_truncated_payload_detected(self, tmp_path):
        path = tmp_path / "cut.npy"
        np.save(path, np.ones((4, 4), dtype=np.float32))
        whole = path.read_bytes()
        path.write_bytes(whole[:-8])
        with pytest.raises(TruncatedPayload):
            read_tensor(path)

    def test_integer_payload_rejected(self, tmp_path):
        path = tmp_path / "ints.npy"
        np.save(path, np.arange(6, dtype=np.int64))
        with pytest.raises(UnsupportedElementType):
            read_tensor(path)

    def test_unwritable_path_is_io_failure(self):
        t = Tensor(np.zeros(3, dtype=np.float32))
        with pytest.raises(IoFailure):
            write_tensor(t, "/nonexistent-dir/t.npy")

    def test_missing_file_is_io_failure(self, tmp_path):
        with pytest.raises(IoFailure):
            read_tensor(tmp_path / "absent.npy")


class TestBilinearResize:
    def test_identity_when_dims_match(self, rng):
        t = Tensor(rng.random((7, 9)).astype(np.float32))
        out = bilinear_resize(t, 7, 9)
        assert np.array_equal(out.data, t.data)

    def test_constant_field_stays_constant(self):
        t = Tensor(np.full((14, 14), 3.25, dtype=np.float32))
        out = bilinear_resize(t, 28, 28)
        assert out.spatial == (28, 28)
        assert np.all(out.data == np.float32(3.25))

    def test_two_by_two_to_three_by_three(self):
        t = Tensor(np.array([[0, 1], [1, 2]], dtype=np.float32))
        out = bilinear_resize(t, 3, 3)
        expected = np.array(
            [[0.0, 0.5, 1.0], [0.5, 1.0, 1.5], [1.0, 1.5, 2.0]],
            dtype=np.float32,
        )
        assert np.allclose(out.data, expected, atol=1e-7)
        assert out.data[1, 1] == pytest.approx(1.0)

    def test_channels_resized_independently(self, rng):
        t = Tensor(rng.random((3, 4, 4)).astype(np.float32))
        out = bilinear_resize(t, 8, 8)
        for c in range(3):
            per = bilinear_resize(Tensor(t.data[c]), 8, 8)
            assert np.array_equal(out.data[c], per.data)

    def test_zero_extent_rejected(self):
        t = Tensor(np.ones((2, 2), dtype=np.float32))
        with pytest.raises(ZeroExtent):
            bilinear_resize(t, 0, 5)


class TestGlobalAveragePool:
    def test_constant_channel(self):
        t = Tensor(np.full((5, 2, 2), 4.5, dtype=np.float32))
        assert np.allclose(global_average_pool(t), 4.5)

    def test_plain_mean(self):
        t = Tensor(np.array([[[1, 2], [3, 4]]], dtype=np.float32))
        assert global_average_pool(t)[0] == pytest.approx(2.5)

    def test_masked_single_value_uses_full_denominator(self):
        chan = np.zeros((1, 2, 2), dtype=np.float32)
        chan[0, 1, 0] = 8.0
        assert global_average_pool(Tensor(chan))[0] == pytest.approx(2.0)

    def test_mean_stays_within_channel_range(self, rng):
        t = Tensor(rng.random((6, 3, 5)).astype(np.float32))
        pooled = global_average_pool(t)
        flat = t.data.reshape(6, -1)
        assert np.all(pooled >= flat.min(axis=1) - 1e-7)
        assert np.all(pooled <= flat.max(axis=1) + 1e-7)


class TestL2Normalize:
    def test_three_four_five_triangle(self):
        out = l2_normalize(np.array([3.0, 4.0]))
        assert np.allclose(out, [0.6, 0.8])

    def test_unit_vector_unchanged(self):
        v = np.array([0.0, 1.0, 0.0])
        assert np.allclose(l2_normalize(v), v)

    def test_zero_vector_rejected(self):
        with pytest.raises(ZeroVector):
            l2_normalize(np.zeros(4))

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=16))
    def test_result_has_unit_norm_and_is_idempotent(self, values):
        v = np.asarray(values)
        if np.linalg.norm(v) < 1e-6:
            return
        out = l2_normalize(v)
        assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-6)
        assert np.allclose(l2_normalize(out), out, atol=1e-6)


class TestMaskedMultiply:
    def test_all_ones_mask_is_identity(self, rng):
        t = Tensor(rng.random((2, 3, 3)).astype(np.float32))
        out = masked_multiply(t, np.ones((3, 3)))
        assert np.array_equal(out.data, t.data)

    def test_all_zeros_mask_blanks_everything(self, rng):
        t = Tensor(rng.random((2, 3, 3)).astype(np.float32))
        out = masked_multiply(t, np.zeros((3, 3)))
        assert not out.data.any()

    def test_elementwise_product(self):
        t = Tensor(np.array([[1, 2], [3, 4]], dtype=np.float32))
        out = masked_multiply(t, np.array([[1, 0], [0, 1]]))
        assert out.data.tolist() == [[1.0, 0.0], [0.0, 4.0]]

    def test_mask_shape_must_match(self):
        t = Tensor(np.ones((2, 2), dtype=np.float32))
        with pytest.raises(ShapeMismatch):
            masked_multiply(t, np.ones((3, 2)))

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_output_zero_wherever_mask_is_zero(self, seed):
        r = np.random.default_rng(seed)
        t = Tensor(r.random((2, 4, 5)).astype(np.float32))
        mask = (r.random((4, 5)) > 0.5).astype(np.uint8)
        out = masked_multiply(t, mask)
        assert not out.data[:, mask == 0].any()
