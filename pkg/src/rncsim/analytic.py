"""High-SNR frame error approximations and the statistical-CSI comparison.

Error spectra count ordered symbol pairs ``(x, x_hat)``; the pairwise error
expectations below average over pairs with a nonzero error only, since a
pairwise error between identical codewords is undefined.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .constellation import Constellation
from .power_allocation import PROTOCOLS, RCNC, RGNC

DEFAULT_QUADRATURE_POINTS = 256
_PANEL_ORDER = 32


@dataclass(frozen=True)
class ErrorSpectrum:
    """Distinct values of |x - x_hat|^2 with the number of ordered pairs producing each."""

    values: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def mean(self) -> float:
        return float(np.dot(self.values, self.counts) / self.total)

    def mean_inverse(self) -> float:
        return float(np.dot(1.0 / self.values, self.counts) / self.total)


@dataclass(frozen=True)
class AnalyticPoint:
    protocol: str
    R: int
    kappa: float
    tau: float
    rho: float
    sfep: float


def error_spectrum(c: Constellation, include_zero: bool = False) -> ErrorSpectrum:
    """Squared-distance spectrum over all ordered pairs of constellation points.

    Distances are grouped exactly on the integer QAM grid before scaling.
    """
    unit = np.min(np.abs(c.points.real))
    gi = np.rint(c.points.real / unit).astype(np.int64)
    gq = np.rint(c.points.imag / unit).astype(np.int64)
    d_int = (gi[:, None] - gi[None, :]) ** 2 + (gq[:, None] - gq[None, :]) ** 2
    keys, counts = np.unique(d_int.ravel(), return_counts=True)
    if not include_zero:
        keep = keys != 0
        keys, counts = keys[keep], counts[keep]
    return ErrorSpectrum(keys * unit * unit, counts)


def mean_error_energy(c: Constellation) -> float:
    """E|x - x_hat|^2 for independent uniform symbols (equals 4P)."""
    return error_spectrum(c, include_zero=True).mean()


def _pair_spectrum(kappa1, kappa2, c: Constellation):
    """|u1|^2 + |u2|^2 and weights over codeword-pair errors with (u1, u2) != (0, 0)."""
    spec = error_spectrum(c, include_zero=True)
    s = (kappa1 * spec.values[:, None] + kappa2 * spec.values[None, :]) / c.P
    w = spec.counts[:, None] * spec.counts[None, :]
    nonzero = (spec.values[:, None] != 0) | (spec.values[None, :] != 0)
    return s[nonzero], w[nonzero].astype(float)


def gauss_legendre_nodes(a: float, b: float, n: int):
    """Composite Gauss-Legendre nodes/weights on [a, b] with about ``n`` points."""
    panels = max(1, -(-n // _PANEL_ORDER))
    x, w = np.polynomial.legendre.leggauss(_PANEL_ORDER)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def apep_relay(kappa1, kappa2, rho, c: Constellation,
               quadrature_points: int = DEFAULT_QUADRATURE_POINTS) -> float:
    """Average pairwise error probability of the relay's joint decoder.

    For each error event the Rayleigh-averaged pairwise error probability is

        (1 / (pi rho)) * integral_0^{pi/2} (1/rho + s / (8 sin^2 t))^{-1} dt,

    with ``s = |u1|^2 + |u2|^2``; the result averages this over all events.
    """
    if quadrature_points < 64:
        raise ValueError(f"need at least 64 quadrature points, got {quadrature_points}")
    if not rho > 0:
        raise ValueError(f"SNR must be positive, got {rho}")
    s, w = _pair_spectrum(kappa1, kappa2, c)
    t, wt = gauss_legendre_nodes(0.0, np.pi / 2, quadrature_points)
    sin2 = np.sin(t) ** 2
    integrand = 8 * sin2[None, :] / (8 * sin2[None, :] / rho + s[:, None])
    per_event = (integrand @ wt) / (np.pi * rho)
    return float(np.dot(per_event, w) / w.sum())


def relay_fep_highsnr(kappa1, kappa2, rho, c: Constellation) -> float:
    """Relay frame error probability with the 1/rho term inside the integral dropped."""
    s, w = _pair_spectrum(kappa1, kappa2, c)
    return float(c.size ** 2 * np.dot(2.0 / (rho * s), w) / w.sum())


def dest_fep_highsnr(protocol: str, tau, kappa_k, rho, c: Constellation) -> float:
    """Destination frame error probability given a correct relay, high-SNR form.

    For RCNC ``tau`` is the relay fraction of the *partner* symbol (the one the
    destination hears only through the relay); for RGNC it is the total relay
    fraction. ``kappa_k`` is ignored for RCNC.
    """
    spec = error_spectrum(c)
    inv = spec.mean_inverse() * c.P
    if protocol == RCNC:
        return c.size * 2.0 / rho * inv / tau
    if protocol == RGNC:
        return c.size * (2.0 / rho * inv / kappa_k + 2.0 / rho * inv / tau)
    raise ValueError(f"unknown protocol {protocol!r}")


def system_fep(p_relay, p_dest1, p_dest2):
    """System frame error probability when any relay error counts as a system error."""
    return p_relay + (1 - p_relay) * (p_dest1 + p_dest2 - p_dest1 * p_dest2)


def _check_kappa(kappa):
    if not 0 < kappa < 1:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")


def sfep_approx(protocol: str, R: int, kappa, rho):
    """Closed-form high-SNR system frame error probability.

    RCNC: ``2^R / rho * (2^(R-1)/kappa + 2/tau)``;
    RGNC: ``2^R / rho * ((2^(R-1) + 2)/kappa + 1/tau)``, with ``tau = 1 - kappa``.
    Not a probability bound: values above 1 are possible at low SNR.
    """
    _check_kappa(kappa)
    tau = 1 - kappa
    if protocol == RCNC:
        bracket = 2.0 ** (R - 1) / kappa + 2 / tau
    elif protocol == RGNC:
        bracket = (2.0 ** (R - 1) + 2) / kappa + 1 / tau
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    return 2.0 ** R / rho * bracket


def analytic_point(protocol: str, R: int, kappa: float, rho: float) -> AnalyticPoint:
    return AnalyticPoint(protocol, R, kappa, 1 - kappa, rho, sfep_approx(protocol, R, kappa, rho))


def crossover_kappa() -> Fraction:
    """Source share at which both protocols have the same approximate error rate."""
    return Fraction(2, 3)


def performance_gap(R: int, kappa, rho):
    """|RCNC - RGNC| of the closed-form approximations: |2^R/rho (2/kappa - 1/tau)|."""
    _check_kappa(kappa)
    return abs(2.0 ** R / rho * (2 / kappa - 1 / (1 - kappa)))


__all__ = [
    "AnalyticPoint", "ErrorSpectrum", "PROTOCOLS", "RCNC", "RGNC",
    "analytic_point", "apep_relay", "crossover_kappa", "dest_fep_highsnr",
    "error_spectrum", "gauss_legendre_nodes", "mean_error_energy",
    "performance_gap", "relay_fep_highsnr", "sfep_approx", "system_fep",
]
