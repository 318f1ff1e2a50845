"""Counter-based random streams keyed by (seed, frame index, draw index).

Every value is a pure function of its key, so a frame's draws do not depend
on which other frames are generated alongside it or on which worker runs it.
The mixer is the SplitMix64 finalizer applied twice over the packed key.
"""

from __future__ import annotations

import hashlib

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_FRAME_MUL = np.uint64(0xD1B54A32D192ED03)
_ATTEMPT_MUL = np.uint64(0xAEF17502108EF2D9)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_PI = 2.0 * np.pi
_INV_2_53 = 2.0**-53


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer; a bijection on uint64 with full avalanche."""
    x = x ^ (x >> _S30)
    x = x * _M1
    x = x ^ (x >> _S27)
    x = x * _M2
    return x ^ (x >> _S31)


def derive_seed(master: int, *parts) -> int:
    """Derive a 64-bit seed from a master seed and any printable identifiers."""
    text = "|".join([str(int(master))] + [repr(p) for p in parts])
    digest = hashlib.blake2b(text.encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


class FrameStreams:
    """Independent random streams for a batch of frames.

    Row ``i`` of every output is the stream of frame ``frames[i]``; it is
    bit-identical to the output of ``FrameStreams(seed, [frames[i]])``.
    Each stream advances its own draw counter as values are consumed, and
    all rows advance together.

    Parameters
    ----------
    seed : int
        Master seed (reduced mod 2**64).
    frames : array_like of int
        Frame indices.
    attempt : int
        Redraw counter; attempt ``a`` yields a stream independent of ``a - 1``.
    """

    def __init__(self, seed: int, frames, attempt: int = 0):
        self.seed = int(seed) % (1 << 64)
        self.frames = np.atleast_1d(np.asarray(frames, dtype=np.uint64))
        self.attempt = int(attempt)
        self.draws = 0
        with np.errstate(over="ignore"):
            key = mix64(np.array([self.seed], dtype=np.uint64) ^ (np.uint64(self.attempt) * _ATTEMPT_MUL))
            self._base = mix64(key + self.frames * _FRAME_MUL)

    def __len__(self) -> int:
        return len(self.frames)

    def _raw(self, n: int) -> np.ndarray:
        counters = np.arange(self.draws, self.draws + n, dtype=np.uint64)
        self.draws += n
        with np.errstate(over="ignore"):
            return mix64(self._base[:, None] + (counters[None, :] + np.uint64(1)) * _GOLDEN)

    def random(self, n: int) -> np.ndarray:
        """Uniforms on the open interval (0, 1), shape (frames, n)."""
        return ((self._raw(n) >> _S11).astype(np.float64) + 0.5) * _INV_2_53

    def integers(self, high: int, n: int) -> np.ndarray:
        """Uniform integers in [0, high), shape (frames, n)."""
        return np.floor(self.random(n) * high).astype(np.int64)

    def standard_normal(self, n: int) -> np.ndarray:
        """Standard normals by Box-Muller, shape (frames, n)."""
        pairs = (n + 1) // 2
        u = self.random(2 * pairs)
        radius = np.sqrt(-2.0 * np.log(u[:, :pairs]))
        angle = _TWO_PI * u[:, pairs:]
        z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
        return z[:, :n]
