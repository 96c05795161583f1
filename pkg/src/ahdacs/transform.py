"""DCT representation, magnitude truncation and sparsity estimation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct, idct

from ._validation import check_fraction, check_int, check_vector

__all__ = [
    "SparseSpectrum",
    "dct_forward",
    "dct_inverse",
    "truncate",
    "truncate_top_k",
    "estimate_sparsity",
]


@dataclass(frozen=True)
class SparseSpectrum:
    """Kept DCT coefficients of a length-``length`` vector."""

    length: int
    indices: np.ndarray
    values: np.ndarray
    fraction: float

    @property
    def K(self):
        return int(self.indices.size)

    def dense(self):
        out = np.zeros(self.length)
        out[self.indices] = self.values
        return out

    def signal(self):
        """The truncated signal back in the sample domain."""
        return dct_inverse(self.dense())


def dct_forward(x):
    """Orthonormal DCT-II."""
    return dct(check_vector(x), type=2, norm="ortho")


def dct_inverse(coeffs):
    """Inverse of :func:`dct_forward` (orthonormal DCT-III)."""
    return idct(check_vector(coeffs, "coeffs"), type=2, norm="ortho")


def truncate(coeffs, fraction=0.01):
    """Keep coefficients whose magnitude is at least ``fraction`` of the largest.

    An all-zero input yields an empty spectrum (``K == 0``).
    """
    c = check_vector(coeffs, "coeffs")
    fraction = check_fraction(fraction)
    mags = np.abs(c)
    peak = mags.max()
    if peak == 0:
        keep = np.zeros(0, dtype=int)
    else:
        keep = np.flatnonzero(mags >= fraction * peak)
    return SparseSpectrum(c.size, keep, c[keep].copy(), fraction)


def truncate_top_k(coeffs, K):
    """Best ``K``-term approximation: keep the ``K`` largest magnitudes.

    Ties are broken toward the lower index so the result is deterministic.
    """
    c = check_vector(coeffs, "coeffs")
    K = min(check_int(K, "K", minimum=0), c.size)
    order = np.lexsort((np.arange(c.size), -np.abs(c)))
    keep = np.sort(order[:K])
    keep = keep[c[keep] != 0]
    return SparseSpectrum(c.size, keep, c[keep].copy(), float("nan"))


def estimate_sparsity(readings, fraction=0.01):
    """Number of DCT coefficients surviving :func:`truncate` (0 for a zero vector)."""
    return truncate(dct_forward(readings), fraction).K
