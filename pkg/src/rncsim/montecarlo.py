"""Frame-level Monte Carlo estimation of the system frame error probability.

One frame is two slots:

1. each source sends its symbol to the relay and to its own destination;
2. the relay sends its decoded symbols, combined in the complex field (RCNC)
   or over GF(2)^R (RGNC), to both destinations.

A system frame error occurs when either destination recovers the wrong pair
of source symbols. In the default ``count_as_sfee`` mode a relay decoding
error is a system error outright; ``propagate`` forwards the relay's wrong
symbols and judges only what the destinations recover.

Randomness for frame ``i`` is drawn from ``FrameStreams(seed, [i])``, so
estimates do not depend on batch size or on the number of workers.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binomtest

from .channel import ChannelRealization, complex_normal, noise_variance, sample_channel, snr_db_to_rho
from .constellation import SUPPORTED_RATES, build_constellation, gf_superpose
from .decoding import PRECODER, dest_joint_ml_rcnc, dest_ml_rgnc, relay_joint_ml
from .power_allocation import DEGENERATE_GAIN, RCNC, AllocationScheme, allocate
from .streams import FrameStreams

log = logging.getLogger(__name__)

COUNT_AS_SFEE = "count_as_sfee"
PROPAGATE = "propagate"
RELAY_ERROR_MODES = (COUNT_AS_SFEE, PROPAGATE)

# labels (2 uniforms) + channel (12 normals) + noise at 5 receive samples (10 normals)
DRAWS_PER_FRAME = 2 + 12 + 10
MAX_ATTEMPTS = 64
# bound on frames x candidate pairs held in memory at once
_CHUNK_CELLS = 1 << 20


@dataclass(frozen=True)
class SimConfig:
    protocol: str
    R: int
    snr_db: float
    scheme: AllocationScheme
    frames: int = 100_000
    seed: int = 0
    relay_error_mode: str = COUNT_AS_SFEE
    workers: int = 1

    def __post_init__(self):
        if self.R not in SUPPORTED_RATES:
            raise ValueError(f"R={self.R} not supported; choose one of {SUPPORTED_RATES}")
        self.scheme.check_protocol(self.protocol)
        if self.frames < 1:
            raise ValueError(f"frames must be >= 1, got {self.frames}")
        if self.relay_error_mode not in RELAY_ERROR_MODES:
            raise ValueError(f"unknown relay error mode {self.relay_error_mode!r}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if math.isnan(self.snr_db):
            raise ValueError("snr_db is NaN")

    @property
    def rho(self) -> float:
        return snr_db_to_rho(self.snr_db)

    @property
    def sigma2(self) -> float:
        return noise_variance(self.rho)


@dataclass(frozen=True)
class TrialOutcome:
    sfee: bool
    relay_error: bool
    energy: float
    retries: int


@dataclass
class FrameBatch:
    """Per-frame results for a contiguous or arbitrary set of frame indices."""

    frames: np.ndarray
    sfee: np.ndarray
    relay_error: np.ndarray
    energy: np.ndarray
    retries: np.ndarray


@dataclass(frozen=True)
class SfepEstimate:
    errors: int
    trials: int
    sfep: float
    ci_low: float
    ci_high: float
    retries: int = 0
    relay_errors: int = 0
    draws: int = field(default=0, compare=False)


def wilson_interval(errors: int, trials: int, confidence: float = 0.95):
    ci = binomtest(errors, trials).proportion_ci(confidence, method="wilson")
    p = errors / trials
    return min(ci.low, p), max(ci.high, p)


def ipas_rotations(g1, g2):
    """Slot-1 transmit rotations of the two sources under instantaneous CSI.

    Both sources cancel their relay-channel phase. The source split gives
    equal received amplitudes, so in-phase arrival would make ``x1 + x2``
    symmetric in the two symbols; source 2 additionally applies the precoder
    to keep every pair distinguishable at the relay.
    """
    return np.conj(g1) / np.abs(g1), PRECODER * np.conj(g2) / np.abs(g2)


def _degenerate(ch: ChannelRealization) -> np.ndarray:
    return (
        (np.abs(ch.g1) < DEGENERATE_GAIN) | (np.abs(ch.g2) < DEGENERATE_GAIN)
        | (np.abs(ch.h1) < DEGENERATE_GAIN) | (np.abs(ch.h2) < DEGENERATE_GAIN)
    )


def _draw(seed, frames, attempt, size, sigma2):
    streams = FrameStreams(seed, frames, attempt)
    labels = streams.integers(size, 2)
    ch = sample_channel(streams)
    noise = complex_normal(streams, 5, sigma2)
    return labels, ch, noise


def _draw_with_retries(config: SimConfig, frames: np.ndarray, size: int, sigma2: float):
    labels, ch, noise = _draw(config.seed, frames, 0, size, sigma2)
    retries = np.zeros(len(frames), dtype=np.int64)
    if config.scheme.kind != "ipas":
        return labels, ch, noise, retries
    bad = _degenerate(ch)
    attempt = 0
    while bad.any():
        attempt += 1
        if attempt > MAX_ATTEMPTS:
            raise RuntimeError("degenerate channel persisted across redraws")
        idx = np.flatnonzero(bad)
        log.debug("redrawing %d degenerate frames (attempt %d)", len(idx), attempt)
        l2, c2, n2 = _draw(config.seed, frames[idx], attempt, size, sigma2)
        labels[idx], noise[idx] = l2, n2
        coeffs = {}
        for name in ("g1", "g2", "h1", "h2", "hbar1", "hbar2"):
            arr = np.array(getattr(ch, name))
            arr[idx] = getattr(c2, name)
            coeffs[name] = arr
        ch = ChannelRealization(**coeffs)
        retries[idx] += 1
        bad = _degenerate(ch)
    return labels, ch, noise, retries


def _simulate_chunk(config: SimConfig, frames: np.ndarray) -> FrameBatch:
    c = build_constellation(config.R)
    sigma2 = config.sigma2
    labels, ch, noise, retries = _draw_with_retries(config, frames, c.size, sigma2)
    paf = allocate(config.scheme, config.protocol, config.R, ch)

    g1, g2, hbar1, hbar2 = ch.g1, ch.g2, ch.hbar1, ch.hbar2
    if config.scheme.kind == "ipas":
        rot1, rot2 = ipas_rotations(g1, g2)
        g1, g2 = g1 * rot1, g2 * rot2
        hbar1, hbar2 = hbar1 * rot1, hbar2 * rot2

    s1, s2 = labels[:, 0], labels[:, 1]
    x1, x2 = c.points[s1], c.points[s2]
    k1, k2, t1, t2 = paf.kappa1, paf.kappa2, paf.tau1, paf.tau2

    y_r = g1 * np.sqrt(k1) * x1 + g2 * np.sqrt(k2) * x2 + noise[:, 0]
    y11 = hbar1 * np.sqrt(k1) * x1 + noise[:, 1]
    y21 = hbar2 * np.sqrt(k2) * x2 + noise[:, 2]

    relay = relay_joint_ml(y_r, g1, g2, k1, k2, c)
    r1, r2 = relay.s1_hat, relay.s2_hat
    relay_error = (r1 != s1) | (r2 != s2)

    if config.protocol == RCNC:
        xr1, xr2 = c.points[r1], c.points[r2]
        tx = np.sqrt(t1) * xr1 + PRECODER * np.sqrt(t2) * xr2
        y12 = ch.h1 * tx + noise[:, 3]
        y22 = ch.h2 * tx + noise[:, 4]
        d1 = dest_joint_ml_rcnc(y11, y12, hbar1, ch.h1, k1, t1, t2, 1, c)
        d2 = dest_joint_ml_rcnc(y21, y22, hbar2, ch.h2, k2, t1, t2, 2, c)
        energy = k1 * _energy(x1) + k2 * _energy(x2) + t1 * _energy(xr1) + t2 * _energy(xr2)
    else:
        tau = paf.tau
        xr = c.points[gf_superpose(r1, r2)]
        y12 = ch.h1 * np.sqrt(tau) * xr + noise[:, 3]
        y22 = ch.h2 * np.sqrt(tau) * xr + noise[:, 4]
        d1 = dest_ml_rgnc(y11, y12, hbar1, ch.h1, k1, tau, 1, c)
        d2 = dest_ml_rgnc(y21, y22, hbar2, ch.h2, k2, tau, 2, c)
        energy = k1 * _energy(x1) + k2 * _energy(x2) + tau * _energy(xr)

    dest_error = (
        (d1.s1_hat != s1) | (d1.s2_hat != s2)
        | (d2.s1_hat != s1) | (d2.s2_hat != s2)
    )
    sfee = dest_error | relay_error if config.relay_error_mode == COUNT_AS_SFEE else dest_error
    return FrameBatch(frames, sfee, relay_error, np.broadcast_to(energy, sfee.shape), retries)


def _energy(x):
    return x.real * x.real + x.imag * x.imag


def chunk_size(R: int) -> int:
    return max(1, _CHUNK_CELLS >> (2 * R))


def simulate_frames(config: SimConfig, frames) -> FrameBatch:
    """Simulate the given frame indices and return per-frame outcomes."""
    frames = np.atleast_1d(np.asarray(frames, dtype=np.int64))
    step = chunk_size(config.R)
    parts = [_simulate_chunk(config, frames[i:i + step]) for i in range(0, len(frames), step)]
    if len(parts) == 1:
        return parts[0]
    return FrameBatch(*(np.concatenate([getattr(p, f) for p in parts])
                        for f in ("frames", "sfee", "relay_error", "energy", "retries")))


def run_trial(config: SimConfig, frame_index: int) -> TrialOutcome:
    """Simulate a single frame."""
    b = simulate_frames(config, [frame_index])
    return TrialOutcome(bool(b.sfee[0]), bool(b.relay_error[0]), float(b.energy[0]), int(b.retries[0]))


def _count_range(config: SimConfig, start: int, stop: int, step: int):
    errors = retries = relay_errors = 0
    for lo in range(start, stop, step):
        b = _simulate_chunk(config, np.arange(lo, min(lo + step, stop), dtype=np.int64))
        errors += int(b.sfee.sum())
        retries += int(b.retries.sum())
        relay_errors += int(b.relay_error.sum())
    return errors, retries, relay_errors


def estimate_sfep(config: SimConfig, step: int | None = None) -> SfepEstimate:
    """Estimate the system frame error probability over frames 0 .. frames-1.

    ``step`` overrides the number of frames vectorized at once; it changes
    speed and memory only, never the result.
    """
    step = step or chunk_size(config.R)
    n = config.frames
    workers = min(config.workers, max(1, n // step))
    if workers == 1:
        counts = [_count_range(config, 0, n, step)]
    else:
        bounds = np.linspace(0, n, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_count_range, config, int(a), int(b), step)
                       for a, b in zip(bounds[:-1], bounds[1:])]
            counts = [f.result() for f in futures]
    errors, retries, relay_errors = (sum(col) for col in zip(*counts))
    low, high = wilson_interval(errors, n)
    if retries:
        log.info("%d degenerate-channel redraws over %d frames", retries, n)
    return SfepEstimate(errors, n, errors / n, low, high, retries, relay_errors,
                        draws=(n + retries) * DRAWS_PER_FRAME)


def sweep(configs) -> list[SfepEstimate]:
    """Estimate each configuration in order; each carries its own seed."""
    configs = list(configs)
    if not configs:
        raise ValueError("sweep needs at least one configuration")
    return [estimate_sfep(cfg) for cfg in configs]
