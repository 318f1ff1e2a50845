"""Square QAM alphabets with Gray labels and the Galois-field superposition.

Points are indexed by label, so ``c.points[label]`` is the symbol carrying
that label. Labels pack the in-phase Gray bits in the high half and the
quadrature Gray bits in the low half.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUPPORTED_RATES = (2, 4, 6)


class UnsupportedRateError(ValueError):
    """Raised for a bits-per-symbol value with no square QAM alphabet."""


def gray_encode(n):
    return n ^ (n >> 1)


def gray_decode(g):
    n = g
    shift = g >> 1
    while np.any(shift):
        n = n ^ shift
        shift = shift >> 1
    return n


@dataclass(frozen=True, eq=False)
class Constellation:
    """A normalized 2^R-QAM alphabet.

    Attributes
    ----------
    R : int
        Bits per symbol.
    P : float
        Power scale; the mean symbol energy is ``2 * P``.
    points : np.ndarray
        Complex symbols, ``points[label]``. Read-only.
    """

    R: int
    P: float
    points: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return 1 << self.R

    @property
    def labels(self) -> np.ndarray:
        return np.arange(self.size)

    @property
    def side(self) -> int:
        """Number of amplitude levels per axis."""
        return 1 << (self.R // 2)

    def point(self, label):
        return self.points[label]

    def label_of(self, point, atol: float = 1e-9):
        """Inverse of :meth:`point` for exact constellation symbols."""
        dist = np.abs(np.asarray(point)[..., None] - self.points)
        idx = np.argmin(dist, axis=-1)
        if np.any(np.take_along_axis(dist, idx[..., None], axis=-1) > atol):
            raise ValueError("value is not a constellation point")
        return idx if idx.ndim else int(idx)

    def grid_position(self, label: int) -> tuple[int, int]:
        """(in-phase index, quadrature index) of ``label`` on the QAM grid."""
        half = self.R // 2
        mask = (1 << half) - 1
        return int(gray_decode(label >> half)), int(gray_decode(label & mask))

    def mean_energy(self) -> float:
        return float(np.mean(np.abs(self.points) ** 2))


def build_constellation(R: int, P: float = 1.0) -> Constellation:
    """Build the Gray-labeled square 2^R-QAM alphabet with mean energy 2P.

    >>> c = build_constellation(2)
    >>> sorted(np.abs(c.points) ** 2)
    [2.0, 2.0, 2.0, 2.0]
    """
    if R not in SUPPORTED_RATES:
        raise UnsupportedRateError(f"R={R} not supported; choose one of {SUPPORTED_RATES}")
    if not P > 0:
        raise ValueError(f"power scale must be positive, got {P}")

    half = R // 2
    side = 1 << half
    labels = np.arange(1 << R)
    i_idx = gray_decode(labels >> half)
    q_idx = gray_decode(labels & (side - 1))
    i_amp = 2 * i_idx - (side - 1)
    q_amp = 2 * q_idx - (side - 1)

    # mean of a^2 + b^2 over the unscaled grid is 2 (side^2 - 1) / 3
    scale = np.sqrt(2 * P / (2 * (side * side - 1) / 3))
    points = (i_amp * scale) + 1j * (q_amp * scale)
    points.setflags(write=False)
    return Constellation(R=R, P=float(P), points=points)


def gf_superpose(a, b):
    """Add two labels over GF(2)^R (bitwise XOR). Accepts ints or arrays."""
    return a ^ b
