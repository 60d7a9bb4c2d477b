"""Complex arrays as nested ``[re, im]`` lists."""

import numpy as np


def encode_complex(a):
    """Nested lists of ``[re, im]`` pairs."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [encode_complex(x) for x in a]


def decode_complex(data):
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape[-1] != 2:
        raise ValueError(f"complex numbers must be [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]
