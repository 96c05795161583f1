"""Synthetic sensed fields over a square region.

Two kinds are supported: a constant field with exponentially decaying
bumps, and a two-level piecewise field split along the
diagonal ``x = y`` with per-position Gaussian noise.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ._validation import (
    InvalidParameterError,
    OutOfRangeError,
    check_int,
    check_nonnegative,
    check_positions,
    check_positive,
)

__all__ = [
    "FieldKind",
    "Bump",
    "ScalarField",
    "gen_gaussian_bumps",
    "gen_piecewise",
    "sample",
]

DEFAULT_EXTENT = 4000.0
DEFAULT_BUMP_COUNT = 10
DEFAULT_HEIGHT = 10.0
DEFAULT_DECAY = 0.01
DEFAULT_BASE = 10.0
DEFAULT_LOW = 10.0
DEFAULT_HIGH = 20.0
DEFAULT_NOISE_VARIANCE = 0.01

# positions are snapped to this grid (meters) before hashing the noise
_NOISE_QUANTUM = 1.0


class FieldKind(str, enum.Enum):
    GAUSSIAN_BUMPS = "gaussian-bumps"
    PIECEWISE = "piecewise"


@dataclass(frozen=True)
class Bump:
    center: tuple
    height: float
    decay: float


@dataclass(frozen=True)
class ScalarField:
    """A deterministic scalar field on ``[0, extent]^2``.

    Use :func:`gen_gaussian_bumps` or :func:`gen_piecewise` to build one;
    evaluate with :meth:`sample` (single point) or :meth:`sample_many`.
    """

    kind: FieldKind
    extent: float
    seed: int
    bumps: tuple = ()
    base: float = 0.0
    low: float = DEFAULT_LOW
    high: float = DEFAULT_HIGH
    noise_variance: float = 0.0
    _centers: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        centers = np.array([b.center for b in self.bumps], dtype=float).reshape(-1, 2)
        object.__setattr__(self, "_centers", centers)

    @property
    def max_value(self):
        if self.kind is FieldKind.GAUSSIAN_BUMPS:
            return self.base + sum(b.height for b in self.bumps)
        return max(self.low, self.high)

    def sample_many(self, positions):
        """Evaluate the field at an ``(n, 2)`` array of positions."""
        P = check_positions(positions, "positions")
        if np.any(P < 0) or np.any(P > self.extent):
            raise OutOfRangeError(f"positions must lie within [0, {self.extent}]^2")
        if self.kind is FieldKind.GAUSSIAN_BUMPS:
            out = np.full(len(P), self.base)
            for b, c in zip(self.bumps, self._centers):
                dist = np.hypot(P[:, 0] - c[0], P[:, 1] - c[1])
                out += b.height * np.exp(-b.decay * dist)
            return out
        out = np.where(P[:, 0] < P[:, 1], self.low, self.high).astype(float)
        if self.noise_variance > 0:
            out += np.sqrt(self.noise_variance) * _position_noise(self.seed, P)
        return out

    def sample(self, position):
        return float(self.sample_many(np.asarray(position, dtype=float).reshape(1, 2))[0])


def _position_noise(seed, P):
    """Standard normal draws keyed on (seed, quantized position).

    Each point gets its own generator so the value never depends on the
    order or batch in which points are sampled.
    """
    q = np.floor(P / _NOISE_QUANTUM).astype(np.int64)
    out = np.empty(len(P))
    for k, (qx, qy) in enumerate(q):
        ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, 0x6E6F697365, int(qx), int(qy)])
        out[k] = np.random.default_rng(ss).standard_normal()
    return out


def gen_gaussian_bumps(
    extent=DEFAULT_EXTENT,
    bump_count=DEFAULT_BUMP_COUNT,
    height=DEFAULT_HEIGHT,
    decay=DEFAULT_DECAY,
    seed=0,
    base=DEFAULT_BASE,
):
    """Constant field plus ``bump_count`` bumps at uniform random centers.

    The value at ``p`` is ``base + sum_j height * exp(-decay * |p - c_j|)``.
    """
    extent = check_positive(extent, "extent")
    height = check_positive(height, "height")
    decay = check_positive(decay, "decay")
    bump_count = check_int(bump_count, "bump_count", minimum=0)
    seed = check_int(seed, "seed")
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, 0x62756D70]))
    centers = rng.uniform(0.0, extent, size=(bump_count, 2))
    bumps = tuple(Bump((float(x), float(y)), height, decay) for x, y in centers)
    if not np.isfinite(base):
        raise InvalidParameterError("base must be finite")
    return ScalarField(FieldKind.GAUSSIAN_BUMPS, extent, seed, bumps=bumps, base=float(base))


def gen_piecewise(
    extent=DEFAULT_EXTENT,
    low=DEFAULT_LOW,
    high=DEFAULT_HIGH,
    noise_variance=DEFAULT_NOISE_VARIANCE,
    seed=0,
):
    """Field equal to ``low`` where ``x < y`` and ``high`` elsewhere, plus noise."""
    extent = check_positive(extent, "extent")
    noise_variance = check_nonnegative(noise_variance, "noise_variance")
    seed = check_int(seed, "seed")
    if not (np.isfinite(low) and np.isfinite(high)):
        raise InvalidParameterError("low and high must be finite")
    return ScalarField(
        FieldKind.PIECEWISE,
        extent,
        seed,
        low=float(low),
        high=float(high),
        noise_variance=noise_variance,
    )


def sample(field, position):
    return field.sample(position)
