"""
Special functions used by the density, moment and bound code.

Scalar kernels are compiled with numba so that the Monte Carlo hot loops
can call them without going back to Python. The public wrappers validate
their domain and accept either scalars or numpy arrays.
"""

import math

import numpy as np
from numba import njit, vectorize

EULER_GAMMA = 0.5772156649015329

_TINY = 1e-300
_EPS = 1e-17
_MAX_ITER = 100000


class DomainError(ValueError):
    """Raised when an argument lies outside a function's domain."""


# ---------------------------------------------------------------------------
#  Incomplete gamma
# ---------------------------------------------------------------------------

@njit(cache=True)
def _log_prefix(a, x):
    return a * math.log(x) - x - math.lgamma(a)


@njit(cache=True)
def _series_log_p(a, x):
    # ln P(a, x) from the power series, valid and accurate for x < a + 1
    term = 1.0 / a
    total = term
    n = 1
    while n < _MAX_ITER:
        term *= x / (a + n)
        total += term
        if term < total * _EPS:
            break
        n += 1
    return _log_prefix(a, x) + math.log(total)


@njit(cache=True)
def _cf_log_q(a, x):
    # ln Q(a, x) from the Legendre continued fraction, modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    i = 1
    while i < _MAX_ITER:
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
        i += 1
    return _log_prefix(a, x) + math.log(h)


@njit(cache=True)
def _log_p(a, x):
    if x <= 0.0:
        return -math.inf
    if x < a + 1.0:
        return _series_log_p(a, x)
    return math.log1p(-math.exp(_cf_log_q(a, x)))


@njit(cache=True)
def _neg_log_p_abs(a, lga, x):
    """
    -ln P(a, x) to absolute accuracy, for use inside density sums.

    lga is ln Gamma(a). Past a + 1 the tail obeys Q <= x^a e^-x / Gamma(a)
    / (x - a + 1), so once that falls below e^-40 the term is dropped.
    """
    if x < a + 1.0:
        return -_series_log_p(a, x)
    lp = a * math.log(x) - x - lga
    if lp < -40.0:
        return 0.0
    return -math.log1p(-math.exp(_cf_log_q(a, x)))


@njit(cache=True)
def _p(a, x):
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return math.exp(_series_log_p(a, x))
    return -math.expm1(_cf_log_q(a, x))


@vectorize(["float64(float64, float64)"], cache=True)
def _p_ufunc(a, x):
    return _p(a, x)


@vectorize(["float64(float64, float64)"], cache=True)
def _log_p_ufunc(a, x):
    return _log_p(a, x)


# ---------------------------------------------------------------------------
#  Digamma and trigamma
# ---------------------------------------------------------------------------

@njit(cache=True)
def _digamma(x):
    acc = 0.0
    while x < 10.0:
        acc -= 1.0 / x
        x += 1.0
    r = 1.0 / (x * x)
    tail = r * (1.0 / 12 - r * (1.0 / 120 - r * (1.0 / 252 - r * (
        1.0 / 240 - r * (1.0 / 132 - r * (691.0 / 32760 - r / 12))))))
    return acc + math.log(x) - 0.5 / x - tail


@njit(cache=True)
def _trigamma(x):
    acc = 0.0
    while x < 10.0:
        acc += 1.0 / (x * x)
        x += 1.0
    r = 1.0 / (x * x)
    # Euler-Maclaurin tail with Bernoulli coefficients
    tail = (1.0 / 6 - r * (1.0 / 30 - r * (1.0 / 42 - r * (
        1.0 / 30 - r * (5.0 / 66 - r * (691.0 / 2730 - r * 7.0 / 6)))))) / x
    return acc + 1.0 / x + 0.5 * r + tail * r


# ---------------------------------------------------------------------------
#  Exponential integral
# ---------------------------------------------------------------------------

@njit(cache=True)
def _exp1_series(x):
    total = 0.0
    term = 1.0
    k = 1
    while k < 200:
        term *= -x / k
        contrib = term / k
        total += contrib
        if abs(contrib) < abs(total) * _EPS:
            break
        k += 1
    return -EULER_GAMMA - math.log(x) - total


@njit(cache=True)
def _exp1_scaled_cf(x):
    # e^x E1(x) by continued fraction, x > 1
    b = x + 1.0
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    i = 1
    while i < _MAX_ITER:
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
        i += 1
    return h


@njit(cache=True)
def _exp1(x):
    if x <= 1.0:
        return _exp1_series(x)
    return _exp1_scaled_cf(x) * math.exp(-x)


@njit(cache=True)
def _exp1_scaled(x):
    if x <= 1.0:
        return math.exp(x) * _exp1_series(x)
    return _exp1_scaled_cf(x)


@vectorize(["float64(float64)"], cache=True)
def _exp1_scaled_ufunc(x):
    return _exp1_scaled(x)


# ---------------------------------------------------------------------------
#  2F1(1, T-1; T; x)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _hyp2f1_special(t, x, log1mx):
    """2F1(1, T-1; T; x) given x and an accurate ln(1 - x)."""
    if x == 0.0:
        return 1.0
    b = t - 1
    xb = math.exp(b * math.log(x))
    # size of the remainder sum_{m>=b} x^m/m relative to -ln(1-x)
    rem = xb / (b * (1.0 - x) + 1.0)
    if x > 0.5 and rem > 1e-3 * (-log1mx):
        head = 0.0
        xm = 1.0
        for m in range(1, b):
            xm *= x
            head += xm / m
        return b * (-log1mx - head) / xb
    total = 0.0
    xk = 1.0
    k = 0
    while k < _MAX_ITER:
        contrib = xk / (k + b)
        total += contrib
        if contrib < total * _EPS:
            break
        xk *= x
        k += 1
    return b * total


# ---------------------------------------------------------------------------
#  Gaussian tail
# ---------------------------------------------------------------------------

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# rational approximation of the normal quantile (Acklam)
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)


@njit(cache=True)
def _q(x):
    return 0.5 * math.erfc(x / _SQRT2)


@njit(cache=True)
def _phi_inv_lower(p):
    # Acklam's approximation to the standard normal quantile, p <= 0.5
    if p < 0.02425:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


@njit(cache=True)
def _q_inv(p):
    if p > 0.5:
        return -_q_inv(1.0 - p)
    x = -_phi_inv_lower(p)
    for _ in range(2):
        dens = math.exp(-0.5 * x * x) / _SQRT2PI
        if dens == 0.0:
            break
        # Halley step on Q(x) = p
        u = (_q(x) - p) / dens
        x += u / (1.0 - 0.5 * x * u)
    return x


@vectorize(["float64(float64)"], cache=True)
def _q_ufunc(x):
    return _q(x)


# ---------------------------------------------------------------------------
#  Public API
# ---------------------------------------------------------------------------

def _check(cond, msg):
    if not np.all(cond):
        raise DomainError(msg)


def _check_t(t):
    if int(t) != t or t <= 2:
        raise DomainError(f"coherence interval must be an integer > 2, got {t}")
    return int(t)


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def log_gamma(a):
    """ln Gamma(a) for a > 0."""
    if not (a > 0 and math.isfinite(a)):
        raise DomainError(f"log_gamma needs finite a > 0, got {a}")
    return math.lgamma(a)


def reg_lower_inc_gamma(a, x):
    """Regularized lower incomplete gamma P(a, x), a > 0, x >= 0."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    _check(a > 0, "reg_lower_inc_gamma needs a > 0")
    _check(x >= 0, "reg_lower_inc_gamma needs x >= 0")
    return _out(_p_ufunc(a, x))


def log_reg_lower_inc_gamma(a, x):
    """
    ln P(a, x) for a > 0, x > 0.

    Stays finite where P itself underflows, which happens for small x and
    large a.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    _check(a > 0, "log_reg_lower_inc_gamma needs a > 0")
    _check(x > 0, "log_reg_lower_inc_gamma needs x > 0")
    return _out(_log_p_ufunc(a, x))


def alzer_upper_bound(t, x):
    """(T-1) ln(1 + Gamma(T)^{1/(T-1)}/x), an upper bound on -ln P(T-1, x)."""
    t = _check_t(t)
    x = np.asarray(x, dtype=float)
    _check(x > 0, "alzer_upper_bound needs x > 0")
    g = math.exp(math.lgamma(t) / (t - 1))
    return _out((t - 1) * np.log1p(g / x))


def digamma(a):
    """psi(a) = d/da ln Gamma(a), a > 0."""
    _check(a > 0, "digamma needs a > 0")
    return _digamma(float(a))


def hurwitz_zeta2(q):
    """Hurwitz zeta at s=2, i.e. sum_k 1/(k+q)^2, which equals trigamma(q)."""
    _check(q > 0, "hurwitz_zeta2 needs q > 0")
    return _trigamma(float(q))


def exp1(x):
    """Exponential integral E1(x) = int_x^inf e^-t/t dt, x > 0."""
    _check(x > 0, "exp1 needs x > 0")
    return _exp1(float(x))


def exp1_scaled(x):
    """e^x E1(x), finite for all x > 0."""
    x = np.asarray(x, dtype=float)
    _check(x > 0, "exp1_scaled needs x > 0")
    return _out(_exp1_scaled_ufunc(x))


def gauss_2f1_special(t, x):
    """
    2F1(1, T-1; T; x) on 0 <= x < 1.

    T=2 is accepted as well since it reduces to -ln(1-x)/x, a handy check.
    """
    if int(t) != t or t < 2:
        raise DomainError(f"gauss_2f1_special needs integer T >= 2, got {t}")
    if not 0.0 <= x < 1.0:
        raise DomainError(f"gauss_2f1_special needs 0 <= x < 1, got {x}")
    return _hyp2f1_special(int(t), float(x), math.log1p(-x))


def q_func(x):
    """Gaussian tail Q(x) = P[N(0,1) > x]."""
    x = np.asarray(x, dtype=float)
    _check(np.isfinite(x), "q_func needs finite x")
    return _out(_q_ufunc(x))


def q_func_inv(p):
    """Inverse of the Gaussian tail on (0, 1)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"q_func_inv needs 0 < p < 1, got {p}")
    return _q_inv(float(p))
