"""
Rate characterizations for the noncoherent Rayleigh block-fading channel.

Closed-form normal approximations (high-SNR noncoherent, coherent, AWGN),
a Monte Carlo quasistatic approximation, the dependence-testing (DT)
achievability bound and the weakened meta-converse (MC) bound, plus the
packet error probabilities used by the random-access example. Rates are in
nats per channel use.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .infodens import EXACT, UPPER, ChannelParams, block_sums
from .moments import i_lower_mean_closed, i_lower_mean_simplified, u_tilde
from .sampling import (ALLOCATIONS, BLOCKS, FADING, McConfig, RngState,
                       draw_blocks, map_chunks, sample_gamma, stream_id,
                       z_value)
from .specfun import DomainError, _q_ufunc, exp1_scaled, q_func, q_func_inv

__all__ = [
    "BoundResult", "BoundError", "McConfig", "KINDS", "na_high_snr",
    "na_coherent", "na_awgn", "na_quasistatic", "dt_lower", "mc_upper",
    "error_prob", "coherent_capacity", "coherent_dispersion",
    "dt_error_at_rate", "mc_error_at_rate",
]

KINDS = ("dt", "mc", "na_highsnr_closed", "na_highsnr_simplified",
         "na_coherent", "na_quasistatic", "na_awgn", "capacity_lower")

DT_ITERATIONS = 40
RATE_ITERATIONS = 60


class BoundError(RuntimeError):
    """A Monte Carlo bound could not be evaluated for the given settings."""


@dataclass(frozen=True)
class BoundResult:
    rate: float
    rate_ci_half_width: float
    kind: str
    params: ChannelParams = None
    mc_meta: tuple = None
    flags: tuple = field(default_factory=tuple)


def _i_lower(p, variant):
    if variant == "closed":
        return i_lower_mean_closed(p.t, p.rho)
    if variant == "simplified":
        return i_lower_mean_simplified(p.t, p.rho)
    raise DomainError(f"unknown variant {variant!r}")


def capacity_lower(p, variant="closed"):
    """I_lower(rho)/T as a BoundResult."""
    return BoundResult(_i_lower(p, variant) / p.t, 0.0, "capacity_lower", p)


def na_high_snr(p, variant="closed"):
    """I_lower/T - sqrt(U~/(L T^2)) Q^-1(eps)."""
    rate = (_i_lower(p, variant) / p.t
            - math.sqrt(u_tilde(p.t) / (p.l * p.t ** 2)) * q_func_inv(p.epsilon))
    return BoundResult(rate, 0.0, f"na_highsnr_{variant}", p)


# ---------------------------------------------------------------------------
#  Coherent and AWGN references
# ---------------------------------------------------------------------------

def coherent_capacity(rho):
    """E[ln(1 + rho Z)] = e^{1/rho} E1(1/rho), Z ~ Exp(1)."""
    if not rho > 0:
        raise DomainError("rho must be positive")
    return float(exp1_scaled(1.0 / rho))


def _log_gain_variance(rho):
    # Var[ln(1 + rho Z)] integrated in t = ln z, where the integrand is smooth
    c = coherent_capacity(rho)

    def f(t):
        z = math.exp(t)
        return (math.log1p(rho * z) - c) ** 2 * math.exp(t - z)

    val, _ = integrate.quad(f, -60.0, 6.5, epsabs=1e-14, epsrel=1e-12, limit=400,
                            points=[-math.log(rho), 0.0])
    return val


def coherent_dispersion(rho, t):
    """
    Per-block-normalized coherent dispersion
    Var[ln(1 + rho Z)] + (1 - E[1/(1 + rho Z)])/T, which tends to pi^2/6 + 1/T.
    """
    if not rho > 0 or t < 1:
        raise DomainError("need rho > 0 and t >= 1")
    m = coherent_capacity(rho) / rho
    return _log_gain_variance(rho) + (1.0 - m) / t


def na_coherent(p):
    """C_c - sqrt(V_c/L) Q^-1(eps) with perfect receiver channel knowledge."""
    rate = (coherent_capacity(p.rho)
            - math.sqrt(coherent_dispersion(p.rho, p.t) / p.l) * q_func_inv(p.epsilon))
    return BoundResult(rate, 0.0, "na_coherent", p)


def awgn_dispersion(rho):
    return rho * (2.0 + rho) / (1.0 + rho) ** 2


def na_awgn(n, rho, epsilon, params=None):
    """ln(1+rho) - sqrt(V/n) Q^-1(eps) + ln(n)/(2n) for blocklength n."""
    if n < 1 or not rho > 0 or not 0 < epsilon < 1:
        raise DomainError("need n >= 1, rho > 0, 0 < epsilon < 1")
    rate = (math.log1p(rho) - math.sqrt(awgn_dispersion(rho) / n) * q_func_inv(epsilon)
            + math.log(n) / (2.0 * n))
    return BoundResult(rate, 0.0, "na_awgn", params)


def error_prob(model, k_bits, n, rho, t=None, variant="closed"):
    """
    Packet error probability of k bits in n channel uses.

    model is "awgn", "noncoherent" or "coherent"; the fading models need the
    coherence interval t with n a multiple of t. variant picks the closed or
    simplified mean for the noncoherent model.
    """
    if n < 1 or k_bits < 0 or not rho > 0:
        raise DomainError("need n >= 1, k_bits >= 0, rho > 0")
    ln2 = math.log(2.0)
    if model == "awgn":
        arg = ((n * math.log1p(rho) - k_bits * ln2 + 0.5 * math.log(n))
               / math.sqrt(n * awgn_dispersion(rho)))
        return q_func(arg)
    if model not in ("noncoherent", "coherent"):
        raise DomainError(f"unknown model {model!r}")
    if t is None or int(t) != t or t < 1 or n % t:
        raise DomainError(f"n={n} must be a multiple of the coherence interval t={t}")
    if model == "noncoherent":
        p = ChannelParams(t, rho)
        arg = (n * _i_lower(p, variant) - k_bits * t * ln2) / math.sqrt(n * t * u_tilde(t))
    else:
        arg = ((n * coherent_capacity(rho) - k_bits * ln2)
               / math.sqrt(n * t * coherent_dispersion(rho, t)))
    return q_func(arg)


# ---------------------------------------------------------------------------
#  Quasistatic approximation
# ---------------------------------------------------------------------------

def _bisect(f, lo, hi, iterations):
    # f increasing, f(lo) <= 0 < f(hi); returns the last feasible point
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return lo


def na_quasistatic(p, mc, variance="as_written"):
    """
    Rate R solving eps = E[Q((C(H) - L R)/sqrt(V(H)/T))] over Rayleigh draws.

    variance="as_written" uses V(H) = L - sum 1/ln(1 + rho|H|^2)^2, which can
    be nonpositive; those draws are dropped and counted, and the result is
    flagged when more than 1% are dropped. variance="alternative" uses
    L - sum 1/(1 + rho|H|^2)^2.
    """
    if variance not in ("as_written", "alternative"):
        raise DomainError(f"unknown variance form {variance!r}")

    def draw(rng, m):
        g = p.rho * sample_gamma(1.0, rng, m * p.l).reshape(m, p.l)
        cap = np.log1p(g).sum(axis=1)
        if variance == "as_written":
            v = p.l - (1.0 / np.log1p(g) ** 2).sum(axis=1)
        else:
            v = p.l - (1.0 / (1.0 + g) ** 2).sum(axis=1)
        return cap, v

    parts = map_chunks(draw, mc.n_samples, mc.seed, FADING, mc.workers, mc.chunk)
    cap = np.concatenate([c for c, _ in parts])
    v = np.concatenate([v for _, v in parts])
    keep = v > 0
    dropped = int(np.size(keep) - np.count_nonzero(keep))
    flags = []
    if dropped > 0.01 * cap.size:
        flags.append(f"nonpositive_variance:{dropped}")
    cap, scale = cap[keep], np.sqrt(v[keep] / p.t)
    if cap.size < 2:
        raise BoundError("no fading draws with positive variance")

    def err(r):
        return float(np.mean(_q_ufunc((cap - p.l * r) / scale)))

    hi = float(cap.max()) / p.l + 10.0 * float(scale.max()) / p.l + 1.0
    if err(0.0) > p.epsilon or err(hi) <= p.epsilon:
        raise BoundError("quasistatic error target not bracketed")
    r = _bisect(lambda x: err(x) - p.epsilon, 0.0, hi, RATE_ITERATIONS)
    q = _q_ufunc((cap - p.l * r) / scale)
    h = 1e-4 * max(r, 1e-3)
    slope = (err(r + h) - err(max(r - h, 0.0))) / (r + h - max(r - h, 0.0))
    se = float(np.std(q, ddof=1)) / math.sqrt(q.size)
    ci = z_value(mc.confidence) * se / slope if slope > 0 else math.inf
    return BoundResult(r, ci, "na_quasistatic", p, (mc.n_samples, mc.seed), tuple(flags))


# ---------------------------------------------------------------------------
#  Dependence-testing achievability bound
# ---------------------------------------------------------------------------

def _info_sums(p, mc):
    alphas = np.full(p.l, p.rho)

    def work(rng, m):
        z1, z2 = draw_blocks(rng, m, p.t, p.l)
        return block_sums(p, alphas, z1, z2, EXACT)

    return np.concatenate(map_chunks(work, mc.n_samples, mc.seed, BLOCKS,
                                     mc.workers, mc.chunk))


def _dt_terms(gamma, s):
    # P[S <= g] + e^g E[e^-S 1{S > g}] = E[min(1, e^{g - S})], in log space
    return np.exp(np.minimum(gamma - s, 0.0))


def _dt_eps(gamma, s):
    return float(np.mean(_dt_terms(gamma, s)))


def _dt_solve(s, target, hi):
    if _dt_eps(0.0, s) > target:
        return None
    while _dt_eps(hi, s) <= target:
        hi *= 2.0
    return _bisect(lambda g: _dt_eps(g, s) - target, 0.0, hi, DT_ITERATIONS)


def _log_m(gamma):
    # ln M with M - 1 = floor(e^gamma), rounding the codebook size down
    if gamma < 700.0:
        return math.log(math.floor(math.exp(gamma)) + 1.0)
    return gamma + math.log1p(math.exp(-gamma))


def dt_lower(p, mc):
    """
    DT lower bound on the maximal rate with USTM inputs.

    The error estimate E[min(1, e^{ln(M-1) - i})] is monotone in ln(M-1) on
    a fixed sample set, so ln(M-1) is found by bisection and then M is
    rounded down to an integer. The CI half-width comes from re-solving at
    eps -/+ z * (standard error of the estimate).
    """
    s = _info_sums(p, mc)
    n = s.size
    hi = p.l * i_lower_mean_closed(p.t, p.rho) + 10.0 * math.sqrt(p.l * u_tilde(p.t))
    hi = max(hi, 1.0)
    meta = (mc.n_samples, mc.seed)
    g = _dt_solve(s, p.epsilon, hi)
    if g is None:
        return BoundResult(0.0, 0.0, "dt", p, meta, ("m2_fails",))
    rate = _log_m(g) / (p.l * p.t)
    se = float(np.std(_dt_terms(g, s), ddof=1)) / math.sqrt(n)
    dz = z_value(mc.confidence) * se
    flags = []
    g_lo = _dt_solve(s, p.epsilon - dz, hi) if p.epsilon > dz else None
    if g_lo is None:
        g_lo = 0.0
        flags.append("ci_ambiguous")
    g_hi = _dt_solve(s, p.epsilon + dz, hi)
    ci = 0.5 * (g_hi - g_lo) / (p.l * p.t)
    return BoundResult(rate, ci, "dt", p, meta, tuple(flags))


def dt_error_at_rate(p, rate, mc):
    """DT error estimate and CI half-width for a codebook of rate `rate`."""
    s = _info_sums(p, mc)
    nats = rate * p.l * p.t
    gamma = nats + math.log(-math.expm1(-nats))
    terms = _dt_terms(gamma, s)
    se = float(np.std(terms, ddof=1)) / math.sqrt(terms.size)
    return float(np.mean(terms)), z_value(mc.confidence) * se


# ---------------------------------------------------------------------------
#  Weakened meta-converse bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ConverseTail:
    edges: np.ndarray
    tail: np.ndarray          # P[S_a >= edge] per allocation and edge
    n_homogeneous: int
    n: int


def _allocations(p, mc):
    levels = np.linspace(p.rho / 2.0, p.rho, mc.alpha_grid)
    hom = np.repeat(levels[:, None], p.l, axis=1)
    if mc.heterogeneous == 0:
        return hom
    rng = RngState(mc.seed, stream_id(ALLOCATIONS, 0))
    het = p.rho / 2.0 * (1.0 + rng.uniform((mc.heterogeneous, p.l)))
    return np.vstack([hom, het])


def _converse_tail(p, mc):
    alloc = _allocations(p, mc)
    first = min(mc.chunk, mc.n_samples)
    z1, z2 = draw_blocks(RngState(mc.seed, stream_id(BLOCKS, 0)), first, p.t, p.l)
    lo, hi = math.inf, -math.inf
    for a in alloc:
        s = block_sums(p, a, z1, z2, UPPER)
        mu, sd = float(np.mean(s)), float(np.std(s))
        lo, hi = min(lo, mu - 6.0 * sd), max(hi, mu + 6.0 * sd)
    edges = np.linspace(lo, hi, mc.xi_grid_size)
    k = edges.size

    def work(rng, m):
        z1, z2 = draw_blocks(rng, m, p.t, p.l)
        counts = np.empty((len(alloc), k + 1), dtype=np.int64)
        for i, a in enumerate(alloc):
            idx = np.searchsorted(edges, block_sums(p, a, z1, z2, EXACT), side="right")
            counts[i] = np.bincount(idx, minlength=k + 1)
        return counts

    counts = np.zeros((len(alloc), k + 1), dtype=np.int64)
    for c in map_chunks(work, mc.n_samples, mc.seed, BLOCKS, mc.workers, mc.chunk):
        counts += c
    # number of samples with S >= edges[j] is the count of bins past j
    ge = np.cumsum(counts[:, ::-1], axis=1)[:, ::-1][:, 1:]
    return _ConverseTail(edges, ge / mc.n_samples, mc.alpha_grid, mc.n_samples)


def _converse_rate(tail, p, z, rows):
    pmax = tail.tail[rows].max(axis=0)
    slack = 1.0 - p.epsilon - pmax
    ok = slack > 0
    if not ok.any():
        raise BoundError("every ln(xi) grid point has 1 - eps - P <= 0")
    vals = np.full(tail.edges.size, math.inf)
    vals[ok] = (tail.edges[ok] - np.log(slack[ok])) / (p.l * p.t)
    j = int(np.argmin(vals))
    se = math.sqrt(pmax[j] * (1.0 - pmax[j]) / tail.n)
    return float(vals[j]), z * se / (slack[j] * p.l * p.t)


def mc_upper(p, mc):
    """
    Weakened meta-converse upper bound with the USTM output law at rho.

    For each ln(xi) on a grid spanning the pilot mean +/- 6 std of the summed
    upper density, P[sum_l j_l(alpha_l) >= ln xi] is maximized over
    homogeneous allocations alpha_l = alpha in [rho/2, rho]. Random
    heterogeneous allocations are checked as well and a warning is raised if
    they push the bound up by more than its CI half-width.
    """
    tail = _converse_tail(p, mc)
    z = z_value(mc.confidence)
    rate, ci = _converse_rate(tail, p, z, slice(0, tail.n_homogeneous))
    flags = []
    if tail.tail.shape[0] > tail.n_homogeneous:
        full, _ = _converse_rate(tail, p, z, slice(None))
        if full - rate > ci:
            flags.append("heterogeneous_allocation_higher")
            warnings.warn(
                f"heterogeneous allocation raises the converse from {rate:.6g} "
                f"to {full:.6g} nats/use (CI {ci:.2g})", RuntimeWarning)
    return BoundResult(rate, ci, "mc", p, (mc.n_samples, mc.seed), tuple(flags))


def mc_error_at_rate(p, rate, mc):
    """
    Converse lower bound on the error probability at a given rate.

    From ln M <= ln xi - ln(1 - eps - P(xi)) for every xi it follows that
    eps >= P[S < ln xi] - xi/M; the best grid point is returned along with
    its binomial CI half-width.
    """
    tail = _converse_tail(p, mc)
    pmax = tail.tail[:tail.n_homogeneous].max(axis=0)
    vals = 1.0 - pmax - np.exp(np.minimum(tail.edges - rate * p.l * p.t, 1.0))
    j = int(np.argmax(vals))
    se = math.sqrt(pmax[j] * (1.0 - pmax[j]) / tail.n)
    return max(float(vals[j]), 0.0), z_value(mc.confidence) * se
