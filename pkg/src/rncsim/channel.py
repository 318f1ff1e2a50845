"""Block Rayleigh fading and additive white Gaussian noise."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class ChannelRealization:
    """Fading coefficients of one frame (or arrays of them, one per frame).

    g1, g2 are source-to-relay, h1, h2 relay-to-destination and hbar1, hbar2
    the direct source-to-destination links. All are CN(0, 1) and held
    constant over both slots of a frame.
    """

    g1: complex
    g2: complex
    h1: complex
    h2: complex
    hbar1: complex
    hbar2: complex

    def g(self, k: int):
        return self.g1 if k == 1 else self.g2

    def h(self, k: int):
        return self.h1 if k == 1 else self.h2

    def hbar(self, k: int):
        return self.hbar1 if k == 1 else self.hbar2


def complex_normal(rng, n: int, sigma2: float = 1.0):
    """Draw ``n`` CN(0, sigma2) samples from ``rng``.

    ``rng`` is anything with a ``standard_normal(n)`` method: a
    :class:`numpy.random.Generator` gives shape ``(n,)``, a
    :class:`rncsim.streams.FrameStreams` gives ``(frames, n)``.
    """
    z = rng.standard_normal(2 * n)
    scale = np.sqrt(sigma2) * _INV_SQRT2
    return (z[..., 0::2] + 1j * z[..., 1::2]) * scale


def sample_channel(rng) -> ChannelRealization:
    """Six i.i.d. CN(0, 1) coefficients for one frame (or a batch of frames)."""
    c = complex_normal(rng, 6)
    return ChannelRealization(*(c[..., i] for i in range(6)))


def awgn(sample, sigma2: float, rng):
    """Add CN(0, sigma2) noise to ``sample``; ``sigma2 == 0`` is a no-op."""
    if sigma2 < 0:
        raise ValueError(f"noise variance must be non-negative, got {sigma2}")
    if sigma2 == 0:
        return sample
    shape = np.shape(sample)
    noise = complex_normal(rng, int(np.prod(shape, dtype=int)), sigma2).reshape(shape)
    return sample + noise


def snr_db_to_rho(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def noise_variance(rho: float, P: float = 1.0) -> float:
    """Per-receiver noise variance sigma^2 = P / rho (zero for infinite SNR)."""
    if rho <= 0:
        raise ValueError(f"SNR must be positive, got {rho}")
    return P / rho
