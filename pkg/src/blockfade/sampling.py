"""
Reproducible, partitionable sampling of the block statistics.

Every random draw comes from a counter-based Philox stream keyed by
(seed, stream_id). Monte Carlo work is cut into fixed-size chunks; chunk c
of purpose p always uses stream_id (p << 32) | c, so the samples do not
depend on how many workers process the chunks or in which order.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import islice

import numpy as np

from .specfun import DomainError, q_func_inv

CHUNK = 1 << 15

# stream purposes
BLOCKS = 0
ALLOCATIONS = 1
FADING = 2
VECTORS = 3

_MASK64 = (1 << 64) - 1


class RngState:
    """
    Counter-based generator state (seed, stream_id, counter).

    Each draw builds a Philox generator at the current counter and then
    moves the counter past every block it touched, so replaying from a saved
    (seed, stream_id, counter) reproduces the following draws exactly.
    """

    def __init__(self, seed, stream_id=0, counter=0):
        if not (0 <= seed <= _MASK64 and 0 <= stream_id <= _MASK64):
            raise DomainError("seed and stream_id must be 64-bit unsigned")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = int(counter)

    def __repr__(self):
        return f"RngState(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

    def _draw(self, fn):
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        ctr = [self.counter & _MASK64, self.counter >> 64, 0, 0]
        bitgen = np.random.Philox(key=key, counter=ctr)
        out = fn(np.random.Generator(bitgen))
        c = bitgen.state["state"]["counter"]
        self.counter = int(c[0]) | (int(c[1]) << 64)
        return out

    def normal(self, size):
        return self._draw(lambda g: g.standard_normal(size))

    def uniform(self, size):
        return self._draw(lambda g: g.random(size))

    def normal_uniform(self, size):
        return self._draw(lambda g: (g.standard_normal(size), g.random(size)))


@dataclass(frozen=True)
class BlockPair:
    """Gamma(1,1) and Gamma(T-1,1) statistics of one block (or arrays of them)."""
    z1: object
    z2: object


@dataclass(frozen=True)
class McEstimate:
    mean: float
    ci_half_width: float
    n_samples: int
    confidence: float


def _gamma_mt(shape, n, rng):
    # Marsaglia-Tsang squeeze/accept-reject, vectorized over a batch
    d = shape - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(n)
    filled = 0
    while filled < n:
        m = int(1.1 * (n - filled)) + 16
        x, u = rng.normal_uniform(m)
        v = 1.0 + c * x
        ok = v > 0
        v = np.where(ok, v * v * v, 1.0)
        x2 = x * x
        with np.errstate(divide="ignore"):
            ok &= (u < 1.0 - 0.0331 * x2 * x2) | (
                np.log(u) < 0.5 * x2 + d * (1.0 - v + np.log(v)))
        acc = d * v[ok]
        take = min(acc.size, n - filled)
        out[filled:filled + take] = acc[:take]
        filled += take
    return out


def sample_gamma(shape, rng, size=None):
    """Gamma(shape, 1) draws for shape >= 1; a float when size is None."""
    if not shape >= 1.0:
        raise DomainError(f"sample_gamma needs shape >= 1, got {shape}")
    if size is None:
        return float(_gamma_mt(float(shape), 1, rng)[0])
    return _gamma_mt(float(shape), int(size), rng)


def _check_t(t):
    if int(t) != t or t <= 2:
        raise DomainError(f"coherence interval must be an integer > 2, got {t}")


def sample_block_pair(t, rng, size=None):
    """Independent z1 ~ Gamma(1,1) and z2 ~ Gamma(T-1,1)."""
    _check_t(t)
    z1 = sample_gamma(1.0, rng, size)
    z2 = sample_gamma(t - 1.0, rng, size)
    return BlockPair(z1, z2)


def sample_fading_block(t, rho, alpha, rng):
    """
    One block of the vector channel y = h x + w.

    x is uniform on the sphere of squared norm T*alpha, h and the entries of
    w are standard circularly symmetric complex Gaussians.
    """
    _check_t(t)
    if not rho > 0 or not 0 <= alpha <= rho:
        raise DomainError("need rho > 0 and 0 <= alpha <= rho")
    g = rng.normal(4 * t + 2) / math.sqrt(2.0)
    u = g[:t] + 1j * g[t:2 * t]
    x = math.sqrt(t * alpha) * u / np.linalg.norm(u)
    w = g[2 * t:3 * t] + 1j * g[3 * t:4 * t]
    h = g[4 * t] + 1j * g[4 * t + 1]
    return x, h * x + w


def mc_mean_ci(stream, n, confidence):
    """Sample mean of the first n values of stream with a normal-theory CI."""
    if n < 2:
        raise DomainError("mc_mean_ci needs n >= 2")
    if not 0 < confidence < 1:
        raise DomainError("confidence must lie in (0, 1)")
    x = np.fromiter(islice(iter(stream), n), dtype=float, count=n)
    mean = float(np.mean(x))
    s = float(np.std(x, ddof=1))
    return McEstimate(mean, z_value(confidence) * s / math.sqrt(n), n, confidence)


def z_value(confidence):
    """Two-sided normal quantile for a confidence level."""
    return q_func_inv((1.0 - confidence) / 2.0)


def stream_id(purpose, chunk):
    return (purpose << 32) | chunk


def chunk_sizes(n, chunk=CHUNK):
    full, rest = divmod(n, chunk)
    return [chunk] * full + ([rest] if rest else [])


def map_chunks(fn, n, seed, purpose, workers=1, chunk=CHUNK):
    """
    Apply fn(rng, size) to each chunk and return the results in chunk order.

    Chunk c always draws from stream (purpose, c), so the result list is the
    same for any worker count.
    """
    jobs = [(RngState(seed, stream_id(purpose, c)), m)
            for c, m in enumerate(chunk_sizes(n, chunk))]
    if workers <= 1 or len(jobs) == 1:
        return [fn(rng, m) for rng, m in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


@dataclass(frozen=True)
class McConfig:
    """
    Monte Carlo settings shared by the moment and bound estimators.

    alpha_grid is the number of homogeneous power levels scanned over
    [rho/2, rho] by the converse; heterogeneous is the number of random
    per-block allocations used as a stress check.
    """
    n_samples: int = 100_000
    seed: int = 0
    workers: int = 1
    confidence: float = 0.95
    xi_grid_size: int = 4097
    alpha_grid: int = 65
    heterogeneous: int = 16
    chunk: int = CHUNK

    def __post_init__(self):
        if self.n_samples < 1000:
            raise DomainError("n_samples must be at least 1000")
        if not 0 < self.confidence < 1:
            raise DomainError("confidence must lie in (0, 1)")
        if self.workers < 1 or self.chunk < 1:
            raise DomainError("workers and chunk must be positive")
        if self.xi_grid_size < 2 or self.alpha_grid < 1 or self.heterogeneous < 0:
            raise DomainError("invalid grid sizes")


def draw_blocks(rng, size, t, l):
    """z1, z2 arrays of shape (size, l) for l independent blocks per row."""
    z1 = sample_gamma(1.0, rng, size * l).reshape(size, l)
    z2 = sample_gamma(t - 1.0, rng, size * l).reshape(size, l)
    return z1, z2
