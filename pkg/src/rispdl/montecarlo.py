"""Monte Carlo estimate of the mean SNR from first principles.

Each trial draws h_d and h_ru, applies the RIS phases that are optimal
without loss, attenuates every element by L(phi_n) and evaluates the matched
filter SNR ``tau * |h_d + H_br Phi L h_ru|**2``. H_br is rank one, so it is
never formed: ``H_br Phi L h_ru = sqrt(beta_br) a_b (a_r^H Phi L h_ru)``.

Trials are grouped in fixed-size blocks. Block ``j`` draws from its own
generator seeded with ``(seed, j)``, and block statistics are merged in block
order, so the estimate does not depend on how blocks are spread over workers.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import pdl
from .channel import ChannelSample, sample_channels, scenario_matrices
from .errors import DomainError

TWO_PI = 2.0 * math.pi
BLOCK_SIZE = 2000


@dataclass(frozen=True)
class EstimateWithError:
    mean: float
    std_error: float
    trials: int
    seed: int

    def z_score(self, reference):
        if self.std_error == 0:
            return 0.0 if reference == self.mean else math.inf
        return (self.mean - reference) / self.std_error


@dataclass(frozen=True)
class RunningStats:
    """Count, mean and sum of squared deviations; merges exactly in order."""
    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def from_samples(cls, x):
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls()
        mu = float(np.mean(x))
        return cls(x.size, mu, float(np.sum((x - mu) ** 2)))

    def merge(self, other):
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / n
        return RunningStats(n, mean, m2)

    @property
    def variance(self):
        return self.m2 / (self.count - 1) if self.count > 1 else 0.0

    @property
    def std_error(self):
        return math.sqrt(self.variance / self.count) if self.count else math.nan


def block_rng(seed, block):
    """Generator for trial block ``block`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed), int(block)))))


def optimal_ris_phases(h_d, h_ru, a_b, a_r):
    """Lossless-optimal RIS phases reduced to [0, 2*pi).

    phi_n = angle(a_b^H h_d) + angle((a_r)_n) - angle(h_ru,n). Works on
    single vectors or on batches with a leading axis.
    """
    proj = np.asarray(h_d) @ np.conj(a_b)
    if np.any(np.abs(proj) < 1e-300):
        raise DomainError("a_b^H h_d vanishes; the optimal phase is undefined")
    phi = np.angle(proj)[..., None] + np.angle(a_r) - np.angle(h_ru)
    return np.mod(phi, TWO_PI)


def instantaneous_snr(sample, a_b, a_r, gains, p, tau_bar, loss_fn=None):
    """Matched-filter SNR under PDL for one draw or a batch of draws.

    ``loss_fn(phases, p)`` overrides the loss model (used to switch the RIS
    path off in tests).
    """
    loss_fn = pdl.loss_vector if loss_fn is None else loss_fn
    h_d, h_ru = np.asarray(sample.h_d), np.asarray(sample.h_ru)
    phi = optimal_ris_phases(h_d, h_ru, a_b, a_r)
    amp = loss_fn(phi, p)
    # a_r^H Phi L h_ru, one complex scalar per draw
    q = np.sum(np.conj(a_r) * np.exp(1j * phi) * amp * h_ru, axis=-1)
    h = h_d + math.sqrt(gains.beta_br) * q[..., None] * a_b
    return tau_bar * np.sum(np.abs(h) ** 2, axis=-1)


def _block_stats(s, mats, seed, block, size, loss_fn):
    rng = block_rng(seed, block)
    draw = sample_channels(s, mats.sqrt_Rd, mats.sqrt_Rru, rng, size=size)
    snr = instantaneous_snr(draw, mats.a_b, mats.a_r, s.gains, s.loss,
                            s.tau_bar, loss_fn)
    return RunningStats.from_samples(snr)


def _blocks(trials, block_size):
    n = -(-trials // block_size)
    return [(j, min(block_size, trials - j * block_size)) for j in range(n)]


def estimate_mean_snr(s, trials, seed, partitions=1, workers=None,
                      block_size=BLOCK_SIZE, loss_fn=None, matrices=None):
    """Sample mean and standard error of the SNR over ``trials`` draws.

    ``partitions`` splits the blocks into that many contiguous substreams,
    evaluated on ``workers`` threads; the result is bit-identical for any
    choice of either.
    """
    trials = int(trials)
    if trials < 2:
        raise DomainError("need at least two trials")
    if partitions < 1:
        raise DomainError("partitions must be >= 1")
    mats = matrices if matrices is not None else scenario_matrices(s)
    blocks = _blocks(trials, block_size)
    chunks = [c for c in np.array_split(np.arange(len(blocks)), partitions)]

    def run(chunk):
        return [_block_stats(s, mats, seed, *blocks[i], loss_fn) for i in chunk]

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_chunk = list(pool.map(run, chunks))
    else:
        per_chunk = [run(c) for c in chunks]

    stats = RunningStats()
    for chunk_stats in per_chunk:          # chunks are contiguous and ordered
        for block_stats in chunk_stats:
            stats = stats.merge(block_stats)
    return EstimateWithError(stats.mean, stats.std_error, stats.count, int(seed))


def sample_phases(s, trials, seed, matrices=None):
    """Optimal RIS phases for ``trials`` draws, shape (trials, N)."""
    mats = matrices if matrices is not None else scenario_matrices(s)
    draw = sample_channels(s, mats.sqrt_Rd, mats.sqrt_Rru, block_rng(seed, 0),
                           size=trials)
    return optimal_ris_phases(draw.h_d, draw.h_ru, mats.a_b, mats.a_r)


def sample_pair_loss_products(angle_r, angle_s, rho, p, trials, seed):
    """Draws of L(phi_r) L(phi_s) for a single correlated element pair.

    The common phase angle(a_b^H h_d) is uniform and independent of h_ru,
    so it is drawn directly.
    """
    rho = complex(rho)
    r = abs(rho)
    rng = block_rng(seed, 0)
    u = (rng.standard_normal((trials, 2)) + 1j * rng.standard_normal((trials, 2))) \
        * math.sqrt(0.5)
    h_r = u[:, 0]
    h_s = np.conj(rho) * u[:, 0] + math.sqrt(max(1.0 - r * r, 0.0)) * u[:, 1]
    z = rng.uniform(0.0, TWO_PI, trials)
    phi_r = z + angle_r - np.angle(h_r)
    phi_s = z + angle_s - np.angle(h_s)
    return pdl.loss_vector(phi_r, p) * pdl.loss_vector(phi_s, p)


__all__ = ["EstimateWithError", "RunningStats", "ChannelSample", "block_rng",
           "optimal_ris_phases", "instantaneous_snr", "estimate_mean_snr",
           "sample_phases", "sample_pair_loss_products"]
