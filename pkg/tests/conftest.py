import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def naive_hamming(a, b):
    """Bit-by-bit count of differing positions."""
    count = 0
    for byte_a, byte_b in zip(bytes(np.asarray(a, dtype=np.uint8)),
                              bytes(np.asarray(b, dtype=np.uint8))):
        for bit in range(8):
            if (byte_a >> bit) & 1 != (byte_b >> bit) & 1:
                count += 1
    return count


def scan_nearest(a, B):
    best_j, best_d = None, None
    for j, b in enumerate(B):
        d = naive_hamming(a, b)
        if best_d is None or d < best_d:
            best_j, best_d = j, d
    return best_j, best_d
