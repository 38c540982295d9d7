"""
Per-block information densities in the Gamma-variate representation.

With z1 ~ Gamma(1,1) and z2 ~ Gamma(T-1,1), one coherence block of the
noncoherent Rayleigh channel under a USTM input of power T*alpha gives
||y||^2 = (1+T alpha) z1 + z2, and the densities below depend on the block
only through (z1, z2). All values are in nats.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .quadrature import expect_gamma
from .specfun import (DomainError, _exp1_scaled, _neg_log_p_abs, exp1_scaled,
                      log_reg_lower_inc_gamma)


@dataclass(frozen=True)
class ChannelParams:
    """Coherence interval t, linear SNR rho, block count l, error target epsilon."""
    t: int
    rho: float
    l: int = 1
    epsilon: float = 1e-3

    def __post_init__(self):
        if int(self.t) != self.t or self.t <= 2:
            raise DomainError(f"t must be an integer > 2, got {self.t}")
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise DomainError(f"rho must be positive and finite, got {self.rho}")
        if int(self.l) != self.l or self.l < 1:
            raise DomainError(f"l must be an integer >= 1, got {self.l}")
        if not 0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        object.__setattr__(self, "t", int(self.t))
        object.__setattr__(self, "l", int(self.l))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "epsilon", float(self.epsilon))


def beta_snr(t, rho):
    """Gamma(T)^{1/(T-1)} (1 + T rho)/(T rho)."""
    if int(t) != t or t <= 2 or not rho > 0:
        raise DomainError("beta_snr needs integer t > 2 and rho > 0")
    return math.exp(math.lgamma(t) / (t - 1)) * (1.0 + 1.0 / (t * rho))


def _check_alpha(p, alpha):
    a = np.asarray(alpha)
    if not np.all((a >= 0) & (a <= p.rho)):
        raise DomainError(f"alpha must lie in [0, rho={p.rho}]")


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def _pair(b):
    return np.asarray(b.z1, dtype=float), np.asarray(b.z2, dtype=float)


def info_density(p, b):
    """i(rho) for one block, exact (includes the -ln P(T-1, .) term)."""
    t, trho = p.t, p.t * p.rho
    z1, z2 = _pair(b)
    s = (1.0 + trho) * z1 + z2
    v = ((t - 1) * math.log(trho) - math.lgamma(t) - trho * z2 / (1.0 + trho)
         + (t - 1) * np.log(s / (1.0 + trho))
         - log_reg_lower_inc_gamma(t - 1, trho * s / (1.0 + trho)))
    return _out(v)


def info_density_lower(p, b):
    """i(rho) with the nonnegative -ln P(T-1, .) term dropped."""
    t, trho = p.t, p.t * p.rho
    z1, z2 = _pair(b)
    s = (1.0 + trho) * z1 + z2
    v = ((t - 1) * math.log(trho) - math.lgamma(t) - trho * z2 / (1.0 + trho)
         + (t - 1) * np.log(s / (1.0 + trho)))
    return _out(v)


def _mismatched_common(p, alpha, b):
    t, trho, ta = p.t, p.t * p.rho, p.t * alpha
    z1, z2 = _pair(b)
    s = (1.0 + ta) * z1 + z2
    v = ((t - 1) * math.log(trho) - math.lgamma(t)
         - (trho - ta) * z1 / (1.0 + trho) - trho * z2 / (1.0 + trho)
         + math.log((1.0 + trho) / (1.0 + ta))
         + (t - 1) * np.log(s / (1.0 + trho)))
    return v, s


def mismatched_density(p, alpha, b):
    """j(alpha): density with a USTM output law at rho, input power T*alpha."""
    _check_alpha(p, alpha)
    v, s = _mismatched_common(p, alpha, b)
    trho = p.t * p.rho
    return _out(v - log_reg_lower_inc_gamma(p.t - 1, trho * s / (1.0 + trho)))


def mismatched_density_upper(p, alpha, b):
    """j(alpha) with -ln P(T-1, .) replaced by its Alzer-type upper bound."""
    _check_alpha(p, alpha)
    v, s = _mismatched_common(p, alpha, b)
    return _out(v + (p.t - 1) * np.log1p(beta_snr(p.t, p.rho) / s))


def density_from_vectors(p, x, y):
    """j evaluated from the vectors of one block, with T*alpha = ||x||^2."""
    x = np.asarray(x)
    y = np.asarray(y)
    t, trho = p.t, p.t * p.rho
    if x.shape != (t,) or y.shape != (t,):
        raise DomainError(f"x and y must have length {t}")
    px = float(np.vdot(x, x).real)
    if px > trho * (1.0 + 1e-12):
        raise DomainError("input violates the power constraint ||x||^2 <= T rho")
    py = float(np.vdot(y, y).real)
    if py == 0.0:
        raise DomainError("zero output vector")
    proj = abs(np.vdot(y, x)) ** 2
    u = trho * py / (1.0 + trho)
    return (math.log((1.0 + trho) / math.exp(math.lgamma(t))) + proj / (1.0 + px)
            - u + (t - 1) * math.log(u) - math.log1p(px)
            - float(log_reg_lower_inc_gamma(t - 1, u)))


# ---------------------------------------------------------------------------
#  Compiled block sums for the Monte Carlo bounds
# ---------------------------------------------------------------------------

EXACT = 0
UPPER = 1
LOWER = 2


@njit(cache=True, nogil=True)
def _block_sums(t, rho, alphas, z1, z2, kind):
    """
    Sum over the L blocks of j(alpha_l) for every row of z1, z2 (n x L).

    alpha_l = rho gives i. kind selects the exact density, the Alzer upper
    surrogate or the lower surrogate without the incomplete-gamma term.
    """
    n, nb = z1.shape
    trho = t * rho
    b = trho / (1.0 + trho)
    base = (t - 1) * (math.log(trho) - math.log1p(trho)) - math.lgamma(t)
    beta = math.exp(math.lgamma(t) / (t - 1)) * (1.0 + 1.0 / trho)
    lga = math.lgamma(t - 1.0)
    c0 = np.empty(nb)
    a1 = np.empty(nb)
    g1 = np.empty(nb)
    for k in range(nb):
        ta = t * alphas[k]
        c0[k] = base + math.log1p(trho) - math.log1p(ta)
        a1[k] = (trho - ta) / (1.0 + trho)
        g1[k] = 1.0 + ta
    out = np.empty(n)
    for r in range(n):
        acc = 0.0
        for k in range(nb):
            s = g1[k] * z1[r, k] + z2[r, k]
            v = c0[k] - a1[k] * z1[r, k] - b * z2[r, k] + (t - 1) * math.log(s)
            if kind == EXACT:
                v += _neg_log_p_abs(t - 1.0, lga, b * s)
            elif kind == UPPER:
                v += (t - 1) * math.log1p(beta / s)
            acc += v
        out[r] = acc
    return out


def block_sums(p, alphas, z1, z2, kind=EXACT):
    """Row sums of per-block densities; alphas has one entry per block."""
    alphas = np.ascontiguousarray(alphas, dtype=float)
    return _block_sums(p.t, p.rho, alphas, np.ascontiguousarray(z1),
                       np.ascontiguousarray(z2), kind)


# ---------------------------------------------------------------------------
#  Diagnostic function g
# ---------------------------------------------------------------------------

def _g_terms(p, rho0, alpha):
    if not rho0 > 0:
        raise DomainError("rho0 must be positive")
    _check_alpha(p, alpha)
    c = p.t - 1 + beta_snr(p.t, rho0)
    return 1.0 + p.t * p.rho, 1.0 + p.t * alpha, c


def g_func(p, rho0, alpha, method="closed"):
    """
    g(alpha) = ln((1+T alpha)/(1+T rho)) + (T-1) E[ln(((1+T rho)Z + c)/((1+T alpha)Z + c))]

    with Z ~ Exp(1) and c = T - 1 + beta(rho0); rho0 defaults to rho.
    method="closed" uses E[ln(1 + Z/u)] = e^u E1(u); method="laguerre"
    applies a 64-node Gauss-Laguerre rule to the same expectation.
    """
    rho0 = p.rho if rho0 is None else rho0
    a, b, c = _g_terms(p, rho0, alpha)
    if method == "closed":
        e = float(exp1_scaled(c / a)) - float(exp1_scaled(c / b))
    elif method == "laguerre":
        e = expect_gamma(lambda z: np.log((a * z + c) / (b * z + c)))
    else:
        raise DomainError(f"unknown method {method!r}")
    return math.log(b / a) + (p.t - 1) * e


def g_deriv(p, rho0, alpha):
    """dg/dalpha = T/(1+T alpha) [-(T-2) + (T-1) u e^u E1(u)], u = c/(1+T alpha)."""
    rho0 = p.rho if rho0 is None else rho0
    _, b, c = _g_terms(p, rho0, alpha)
    u = c / b
    return p.t / b * (-(p.t - 2) + (p.t - 1) * u * _exp1_scaled(u))
