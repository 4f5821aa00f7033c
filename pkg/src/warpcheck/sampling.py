"""Deterministic low-discrepancy sampling (Halton sequence)."""

from __future__ import annotations

import numpy as np

__all__ = ["halton_points", "PRIMES"]

PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29)


def _radical_inverse(index: int, base: int) -> float:
    inv = 0.0
    scale = 1.0 / base
    while index > 0:
        index, digit = divmod(index, base)
        inv += digit * scale
        scale /= base
    return inv


def halton_points(dim: int, count: int, offset: int = 0) -> np.ndarray:
    """``count`` Halton points in [0,1)^dim, starting at sequence index offset+1.

    The leading index is skipped (index 0 maps to the origin in every base,
    which would put a sample on the box corner).
    """
    if dim > len(PRIMES):
        raise ValueError(f"halton sampler supports up to {len(PRIMES)} dimensions")
    out = np.empty((count, dim))
    for row in range(count):
        idx = offset + row + 1
        for d in range(dim):
            out[row, d] = _radical_inverse(idx, PRIMES[d])
    return out
