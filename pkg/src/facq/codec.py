"""Fixed-point binary codec for normalized feature values.

Each feature value in [0, 1 - 2**-l] is expanded into an l-bit word of
fractional bits with weights 2**-1 .. 2**-l.  Unknown features (mask 0)
encode as all-zero words.  Decoding is a plain weighted bit sum and also
accepts probabilistic bit values in [0, 1].
"""

from __future__ import annotations

import numpy as np

DEFAULT_BITS = 8


def bit_weights(l: int = DEFAULT_BITS) -> np.ndarray:
    """Decode weights (2**-1, ..., 2**-l)."""
    return 2.0 ** -np.arange(1, l + 1)


def max_representable(l: int = DEFAULT_BITS) -> float:
    """Largest value an l-bit fractional word can hold: 1 - 2**-l."""
    return 1.0 - 2.0 ** -l


def clamp(x: np.ndarray, l: int = DEFAULT_BITS) -> np.ndarray:
    """Clamp values into the representable range [0, 1 - 2**-l]."""
    return np.clip(x, 0.0, max_representable(l))


def quantize(x: np.ndarray, known: np.ndarray | None = None,
             l: int = DEFAULT_BITS) -> np.ndarray:
    """Encode feature values into l-bit words.

    ``x`` has shape (..., d) with values in [0, 1 - 2**-l]; ``known`` is a
    matching 0/1 mask (None means all known).  Returns floats in {0, 1}
    with shape (..., d, l), most significant bit first.  Unknown features
    encode as all-zero words.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(x < 0.0) or np.any(x > max_representable(l)):
        raise ValueError(f"values outside representable range [0, 1-2^-{l}]")
    if known is not None:
        known = np.asarray(known)
        if known.shape != x.shape:
            raise ValueError(f"mask shape {known.shape} != value shape {x.shape}")
        x = np.where(known.astype(bool), x, 0.0)
    # greedy expansion == truncation to l fractional bits
    n = np.floor(x * (1 << l) + 0.5 * 2.0 ** -52).astype(np.int64)
    n = np.minimum(n, (1 << l) - 1)
    shifts = np.arange(l - 1, -1, -1)
    bits = (n[..., None] >> shifts) & 1
    return bits.astype(np.float64)


def dequantize(bits: np.ndarray, l: int | None = None) -> np.ndarray:
    """Weighted bit sum back to feature values; shape (..., d, l) -> (..., d).

    Accepts probabilistic entries in [0, 1] (expected-value decode).
    """
    bits = np.asarray(bits, dtype=np.float64)
    if np.any(bits < 0.0) or np.any(bits > 1.0):
        raise ValueError("bit entries must lie in [0, 1]")
    l = bits.shape[-1] if l is None else l
    return bits @ bit_weights(l)


def flatten_bits(bits: np.ndarray) -> np.ndarray:
    """(..., d, l) -> (..., d*l), feature-major word order."""
    return bits.reshape(*bits.shape[:-2], -1)


def unflatten_bits(flat: np.ndarray, d: int, l: int = DEFAULT_BITS) -> np.ndarray:
    """(..., d*l) -> (..., d, l)."""
    return flat.reshape(*flat.shape[:-1], d, l)
