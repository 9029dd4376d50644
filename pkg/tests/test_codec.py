import numpy as np
import pytest
from hypothesis import given, strategies as st

from facq import codec


def test_half_encodes_as_msb():
    word = codec.quantize(np.array([0.5]))[0]
    assert word.tolist() == [1, 0, 0, 0, 0, 0, 0, 0]


def test_binary_fraction_expansion():
    # 0.8125 = 1/2 + 1/4 + 1/16
    word = codec.quantize(np.array([0.8125]))[0]
    assert word.tolist() == [1, 1, 0, 1, 0, 0, 0, 0]


def test_unknown_feature_is_all_zeros():
    bits = codec.quantize(np.array([0.3, 0.3]), known=np.array([1.0, 0.0]))
    assert bits[0].any()
    assert not bits[1].any()


def test_all_ones_word_decodes_to_max():
    assert codec.dequantize(np.ones((1, 8)))[0] == pytest.approx(1 - 2**-8)


def test_probabilistic_decode_is_expected_value():
    word = np.full((1, 8), 0.5)
    assert codec.dequantize(word)[0] == pytest.approx(0.5 * (1 - 2**-8))


def test_roundtrip_exact_on_grid():
    grid = np.arange(256) / 256.0
    assert np.array_equal(codec.dequantize(codec.quantize(grid)), grid)


def test_out_of_range_rejected():
    with pytest.raises(ValueError):
        codec.quantize(np.array([1.0]))
    with pytest.raises(ValueError):
        codec.quantize(np.array([-0.1]))
    with pytest.raises(ValueError):
        codec.dequantize(np.array([[1.5] * 8]))


def test_mask_shape_mismatch_rejected():
    with pytest.raises(ValueError):
        codec.quantize(np.zeros(3), known=np.zeros(4))


@given(st.floats(min_value=0.0, max_value=1.0, exclude_max=True))
def test_roundtrip_error_below_lsb(x):
    err = abs(codec.dequantize(codec.quantize(codec.clamp(np.array([x]))))[0] - x)
    assert err < 2**-8


@given(st.integers(0, 255), st.integers(0, 7))
def test_bit_flip_changes_decode_by_its_weight(n, b):
    word = codec.quantize(np.array([n / 256.0]))
    flipped = word.copy()
    flipped[0, b] = 1 - flipped[0, b]
    delta = abs(codec.dequantize(flipped)[0] - codec.dequantize(word)[0])
    assert delta == pytest.approx(2.0 ** -(b + 1))


def test_decode_deltas_span_the_sample_set():
    # the per-bit decode deltas are exactly the discrete sample values
    deltas = set()
    for b in range(8):
        word = np.zeros((1, 8))
        word[0, b] = 1.0
        deltas.add(float(codec.dequantize(word)[0]))
    assert deltas == {2.0 ** -(b + 1) for b in range(8)}


def test_flatten_unflatten_roundtrip():
    rng = np.random.default_rng(0)
    bits = codec.quantize(rng.random((5, 3)) * 0.99)
    flat = codec.flatten_bits(bits)
    assert flat.shape == (5, 24)
    assert np.array_equal(codec.unflatten_bits(flat, 3), bits)
