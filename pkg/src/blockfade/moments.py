"""
Moments of the per-block densities.

Closed forms for the mean of the lower density and the high-SNR variance
limit, a quadrature for the mean of the upper mismatched density, and
streaming Monte Carlo estimates of mean, variance and third absolute
central moment for any of the four densities.
"""

import math
from dataclasses import dataclass

import numpy as np

from .infodens import EXACT, LOWER, UPPER, ChannelParams, beta_snr, block_sums
from .quadrature import gauss_laguerre
from .sampling import BLOCKS, draw_blocks, map_chunks, z_value
from .specfun import (EULER_GAMMA, DomainError, _digamma, _hyp2f1_special,
                      exp1_scaled)

SELECTORS = {"i": EXACT, "i_lower": LOWER, "j": EXACT, "j_upper": UPPER}


@dataclass(frozen=True)
class MomentSet:
    mean: float
    variance: float
    third_abs_central: float
    mean_ci: float = 0.0
    variance_ci: float = 0.0
    third_ci: float = 0.0
    n_samples: int = 0


def _check(t, rho):
    if int(t) != t or t <= 2 or not rho > 0:
        raise DomainError("need integer t > 2 and rho > 0")


def i_lower_mean_closed(t, rho):
    """Mean of the lower density, exact, via digamma and 2F1(1, T-1; T; .)."""
    _check(t, rho)
    t = int(t)
    trho = t * rho
    x = trho / (1.0 + trho)
    f = _hyp2f1_special(t, x, -math.log1p(trho))
    return ((t - 1) * math.log(trho) - math.lgamma(t)
            - (t - 1) * (math.log1p(trho) + x - _digamma(t - 1.0)) + f)


def i_lower_mean_simplified(t, rho):
    """High-SNR form (T-1) ln(T rho) - ln Gamma(T) - (T-1)(1 + Euler gamma)."""
    _check(t, rho)
    return (t - 1) * math.log(t * rho) - math.lgamma(t) - (t - 1) * (1.0 + EULER_GAMMA)


def u_tilde(t):
    """High-SNR variance limit (T-1)^2 pi^2/6 + (T-1)."""
    if int(t) != t or t <= 2:
        raise DomainError("u_tilde needs integer t > 2")
    return (t - 1) ** 2 * math.pi ** 2 / 6.0 + (t - 1)


def log_mean_shifted(t, alpha, shift, n_nodes=64):
    """
    E[ln((1+T alpha) Z1 + Z2 + shift)] for Z1 ~ Exp(1), Z2 ~ Gamma(T-1, 1).

    The Z1 expectation is exact, E[ln(a Z1 + c)] = ln c + e^{c/a} E1(c/a);
    the outer Z2 expectation uses a generalized Gauss-Laguerre rule.
    """
    a = 1.0 + t * alpha
    z, w = gauss_laguerre(n_nodes, float(t - 1))
    c = z + shift
    return float(np.dot(w, np.log(c) + exp1_scaled(c / a)))


def jbar_mean(t, rho, alpha, n_nodes=64):
    """Mean of the upper mismatched density at input power T*alpha."""
    _check(t, rho)
    if not 0 <= alpha <= rho:
        raise DomainError("alpha must lie in [0, rho]")
    t = int(t)
    trho, ta = t * rho, t * alpha
    e = log_mean_shifted(t, alpha, beta_snr(t, rho), n_nodes)
    return ((t - 1) * math.log(trho) - math.lgamma(t) - (trho - ta) / (1.0 + trho)
            - (t - 1) * trho / (1.0 + trho) + math.log1p(trho) - math.log1p(ta)
            - (t - 1) * math.log1p(trho) + (t - 1) * e)


def _merge(a, b):
    # Chan et al. pairwise update of (count, mean, M2)
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    d = mb - ma
    return n, ma + d * nb / n, sa + sb + d * d * na * nb / n


def mc_moments(selector, t, rho, alpha, mc):
    """
    Monte Carlo moments of one block's density.

    selector is one of "i", "i_lower", "j", "j_upper"; alpha is ignored for
    the first two. Mean and variance come from a one-pass chunked update;
    the third absolute central moment needs the final mean, so the chunks
    are replayed from their counter-based streams in a second pass.
    """
    if selector not in SELECTORS:
        raise DomainError(f"unknown selector {selector!r}")
    _check(t, rho)
    p = ChannelParams(t, rho)
    a = rho if selector in ("i", "i_lower") else alpha
    if not 0 <= a <= rho:
        raise DomainError("alpha must lie in [0, rho]")
    kind = SELECTORS[selector]
    alphas = np.array([a])

    def values(rng, m):
        z1, z2 = draw_blocks(rng, m, p.t, 1)
        return block_sums(p, alphas, z1, z2, kind)

    def first(rng, m):
        x = values(rng, m)
        return m, float(np.mean(x)), float(np.sum((x - np.mean(x)) ** 2))

    stats = map_chunks(first, mc.n_samples, mc.seed, BLOCKS, mc.workers, mc.chunk)
    acc = stats[0]
    for s in stats[1:]:
        acc = _merge(acc, s)
    n, mean, m2 = acc
    var = m2 / (n - 1)

    def second(rng, m):
        d = np.abs(values(rng, m) - mean)
        d3 = d ** 3
        return float(np.sum(d3)), float(np.sum(d3 * d3)), float(np.sum(d ** 4))

    sums = np.array(map_chunks(second, mc.n_samples, mc.seed, BLOCKS, mc.workers, mc.chunk))
    s3, s6, s4 = (math.fsum(col) for col in sums.T)
    m3 = s3 / n
    m4 = s4 / n
    z = z_value(mc.confidence)
    return MomentSet(
        mean=mean,
        variance=var,
        third_abs_central=m3,
        mean_ci=z * math.sqrt(var / n),
        variance_ci=z * math.sqrt(max(m4 - var * var, 0.0) / n),
        third_ci=z * math.sqrt(max(s6 / n - m3 * m3, 0.0) / n),
        n_samples=n,
    )
