"""Maximum-likelihood decoders for the relay and the two destinations.

Every decoder is an exhaustive search. Ties go to the lexicographically
smallest ``(s1_label, s2_label)`` because candidates are enumerated in that
order and ``np.argmin`` returns the first minimum.

Inputs may be scalars (one frame) or equal-length 1-D arrays (a batch of
frames); PAFs broadcast the same way.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation, gf_superpose

PRECODER = np.exp(3j * np.pi / 4)


@dataclass(frozen=True)
class DecodeResult:
    s1_hat: int
    s2_hat: int
    metric: float

    def pair(self):
        return self.s1_hat, self.s2_hat


def _pair_grid(c: Constellation):
    """Candidate symbols for all 2^(2R) pairs, pair index = s1 * 2^R + s2."""
    m = c.size
    return np.repeat(c.points, m), np.tile(c.points, m)


def _sqdist(d):
    return d.real * d.real + d.imag * d.imag


def _argmin(metric, scalar):
    idx = np.argmin(metric, axis=-1)
    best = np.take_along_axis(metric, idx[..., None], axis=-1)[..., 0]
    if scalar:
        return int(idx), float(best)
    return idx, best


def _col(x):
    return np.asarray(x)[..., None]


def _is_scalar(*args):
    return all(np.ndim(a) == 0 for a in args)


def relay_joint_ml(y_r, g1, g2, kappa1, kappa2, c: Constellation) -> DecodeResult:
    """Joint ML decision on both source symbols from the relay's slot-1 sample.

    Minimizes ``|y_r - g1 sqrt(kappa1) x1 - g2 sqrt(kappa2) x2|^2`` over all pairs.
    """
    x1, x2 = _pair_grid(c)
    a1 = _col(g1 * np.sqrt(kappa1))
    a2 = _col(g2 * np.sqrt(kappa2))
    composite = a1 * x1 + a2 * x2
    metric = _sqdist(_col(y_r) - composite)
    idx, best = _argmin(metric, _is_scalar(y_r, g1, g2, kappa1, kappa2))
    return DecodeResult(idx // c.size, idx % c.size, best)


def dest_joint_ml_rcnc(y1, y2, hbar_k, h_k, kappa_k, tau1, tau2, k: int, c: Constellation) -> DecodeResult:
    """Two-slot joint ML decision at destination ``k`` under complex-field coding.

    Slot 1 carries only the destination's own source symbol over the direct
    link; slot 2 carries ``sqrt(tau1) x1 + alpha sqrt(tau2) x2`` from the relay.
    """
    if k not in (1, 2):
        raise ValueError(f"destination index must be 1 or 2, got {k}")
    x1, x2 = _pair_grid(c)
    own = x1 if k == 1 else x2
    direct = _col(hbar_k * np.sqrt(kappa_k)) * own
    relayed = _col(h_k) * (_col(np.sqrt(tau1)) * x1 + _col(PRECODER * np.sqrt(tau2)) * x2)
    metric = _sqdist(_col(y1) - direct) + _sqdist(_col(y2) - relayed)
    scalar = _is_scalar(y1, y2, hbar_k, h_k, kappa_k, tau1, tau2)
    idx, best = _argmin(metric, scalar)
    return DecodeResult(idx // c.size, idx % c.size, best)


def symbol_ml(y, gain, c: Constellation):
    """Single-symbol ML label and metric for ``y = gain * x + noise``."""
    metric = _sqdist(_col(y) - _col(gain) * c.points)
    return _argmin(metric, _is_scalar(y, gain))


def dest_ml_rgnc(y1, y2, hbar_k, h_k, kappa_k, tau, k: int, c: Constellation) -> DecodeResult:
    """Per-slot ML at destination ``k`` under Galois-field coding.

    The own symbol comes from slot 1, the relay's XOR symbol from slot 2, and
    the partner symbol is recovered as their label XOR.
    """
    if k not in (1, 2):
        raise ValueError(f"destination index must be 1 or 2, got {k}")
    own, m1 = symbol_ml(y1, hbar_k * np.sqrt(kappa_k), c)
    xr, m2 = symbol_ml(y2, h_k * np.sqrt(tau), c)
    partner = gf_superpose(own, xr)
    if k == 1:
        return DecodeResult(own, partner, m1 + m2)
    return DecodeResult(partner, own, m1 + m2)
