"""Power allocation factors (PAFs) for the two regenerative network-coding protocols.

Three schemes are provided:

* ``fixed``: a user-chosen source share kappa, split evenly (statistical CSI).
* ``ospas``: the kappa that minimizes the high-SNR system frame error
  probability under statistical CSI.
* ``ipas``: a per-frame allocation from instantaneous CSI (RCNC only).

All functions work elementwise on numpy arrays as well as on scalars.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

RCNC = "RCNC"
RGNC = "RGNC"
PROTOCOLS = (RCNC, RGNC)

DEGENERATE_GAIN = 1e-12


class DegenerateChannelError(ValueError):
    """A channel gain is too small for the requested allocation."""


@dataclass(frozen=True)
class PafSet:
    """Per-frame power fractions; kappa1 + kappa2 + tau1 + tau2 == 1.

    RGNC transmits a single relay symbol at the combined fraction ``tau``.
    """

    kappa1: float
    kappa2: float
    tau1: float
    tau2: float

    @property
    def kappa(self):
        return self.kappa1 + self.kappa2

    @property
    def tau(self):
        return self.tau1 + self.tau2

    def source(self, k: int):
        return self.kappa1 if k == 1 else self.kappa2

    def relay(self, k: int):
        return self.tau1 if k == 1 else self.tau2


@dataclass(frozen=True)
class AllocationScheme:
    """Which allocation rule to apply; ``kappa`` is only used by ``fixed``."""

    kind: str
    kappa: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("fixed", "ospas", "ipas"):
            raise ValueError(f"unknown allocation scheme {self.kind!r}")
        if self.kind == "fixed":
            if self.kappa is None or not 0 < self.kappa < 1:
                raise ValueError(f"fixed-kappa scheme needs 0 < kappa < 1, got {self.kappa}")
        elif self.kappa is not None:
            raise ValueError(f"scheme {self.kind!r} takes no kappa")

    @classmethod
    def fixed(cls, kappa: float) -> "AllocationScheme":
        return cls("fixed", float(kappa))

    @classmethod
    def ospas(cls) -> "AllocationScheme":
        return cls("ospas")

    @classmethod
    def ipas(cls) -> "AllocationScheme":
        return cls("ipas")

    def check_protocol(self, protocol: str) -> None:
        if protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {protocol!r}")
        if self.kind == "ipas" and protocol != RCNC:
            raise ValueError("instantaneous-CSI allocation is only defined for RCNC")

    def __str__(self) -> str:
        return self.kind


def ospas_kappa_rcnc(R: int) -> float:
    """Source share minimizing 2^(R-1)/kappa + 2/tau subject to kappa + tau = 1."""
    r = np.sqrt(2.0 ** (R - 2))
    return float(r / (r + 1))


def ospas_kappa_rgnc(R: int) -> float:
    """Source share minimizing (2^(R-1) + 2)/kappa + 1/tau subject to kappa + tau = 1."""
    r = np.sqrt(2.0 ** (R - 1) + 2)
    return float(r / (r + 1))


def ospas_kappa(protocol: str, R: int) -> float:
    if protocol == RCNC:
        return ospas_kappa_rcnc(R)
    if protocol == RGNC:
        return ospas_kappa_rgnc(R)
    raise ValueError(f"unknown protocol {protocol!r}")


def make_statistical_pafset(kappa: float, protocol: str = RCNC) -> PafSet:
    """Even split of kappa over the sources and of 1 - kappa over the relay symbols."""
    if protocol not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}")
    if not 0 < kappa < 1:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
    tau = 1.0 - kappa
    return PafSet(kappa / 2, kappa / 2, tau / 2, tau / 2)


def _gain2(g):
    return np.real(g) ** 2 + np.imag(g) ** 2


def _check_gains(*gains):
    for g in gains:
        if np.any(np.abs(g) < DEGENERATE_GAIN):
            raise DegenerateChannelError("channel gain below degeneracy threshold")


def source_split(kappa, g1, g2):
    """Split kappa so both sources get equal shares of the relay's sum rate.

    Returns ``(kappa1, kappa2)`` with kappa_k proportional to the *other*
    source's channel gain, so kappa1 |g1|^2 == kappa2 |g2|^2.
    """
    a1, a2 = _gain2(g1), _gain2(g2)
    total = a1 + a2
    if np.any(np.sqrt(total) < DEGENERATE_GAIN):
        raise DegenerateChannelError("both source-relay gains vanish")
    return kappa * a2 / total, kappa * a1 / total


def mutual_info_share(kappa1, kappa2, g1, g2):
    """Each source's fraction of the sum-rate at the relay under joint decoding."""
    e1 = kappa1 * _gain2(g1)
    e2 = kappa2 * _gain2(g2)
    total = e1 + e2
    if np.any(total <= 0):
        raise DegenerateChannelError("no received source energy at the relay")
    return e1 / total, e2 / total


def ipas_eta(g1, g2, h1, h2):
    a1, a2 = _gain2(g1), _gain2(g2)
    m1, m2 = np.abs(h1), np.abs(h2)
    return (m1 * m2) ** 2 * (a1 + a2) / (a1 * a2 * (m1 + m2) ** 2)


def ipas_rcnc(g1, g2, h1, h2, R: int) -> PafSet:
    """Instantaneous-CSI allocation for RCNC.

    Minimizes ``2^(R-1)/(kappa |g|^2) + 1/(tau1 |h2|^2) + 1/(tau2 |h1|^2)``
    over ``kappa + tau1 + tau2 = 1`` where ``|g|^2 = |g1 g2|^2 / (|g1|^2 + |g2|^2)``,
    then splits kappa between the sources with :func:`source_split`.
    """
    _check_gains(g1, g2, h1, h2)
    r = np.sqrt(ipas_eta(g1, g2, h1, h2) * 2.0 ** (R - 1))
    kappa = r / (r + 1)
    tau = 1 / (r + 1)
    m1, m2 = np.abs(h1), np.abs(h2)
    kappa1, kappa2 = source_split(kappa, g1, g2)
    return PafSet(kappa1, kappa2, tau * m1 / (m1 + m2), tau * m2 / (m1 + m2))


def allocate(scheme: AllocationScheme, protocol: str, R: int, channel=None) -> PafSet:
    """PafSet for one frame (or a batch of frames when ``channel`` holds arrays)."""
    scheme.check_protocol(protocol)
    if scheme.kind == "fixed":
        return make_statistical_pafset(scheme.kappa, protocol)
    if scheme.kind == "ospas":
        return make_statistical_pafset(ospas_kappa(protocol, R), protocol)
    if channel is None:
        raise ValueError("ipas needs a channel realization")
    return ipas_rcnc(channel.g1, channel.g2, channel.h1, channel.h2, R)
