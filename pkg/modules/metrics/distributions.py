"""
Distribution functions behind every p-value the library reports.

The regularized incomplete gamma and beta functions are evaluated with a
power series or a modified Lentz continued fraction; the t, F, chi-square
and normal distributions are expressed through them. The Kolmogorov
distribution uses its two classical theta-function series. Only
``scipy.special.gammaln`` is borrowed, for the log-gamma prefactors.
"""

import math

from scipy.special import gammaln

from .core import DomainError

EPS = 1e-16
FPMIN = 1e-300
MAX_ITER = 20000
SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# Incomplete gamma
# ---------------------------------------------------------------------------

def _gamma_prefactor(a: float, x: float) -> float:
    return math.exp(-x + a * math.log(x) - float(gammaln(a)))


def _gamma_series(a: float, x: float) -> float:
    """P(a, x) by its power series; converges fast for x < a + 1"""
    ap = a
    total = 1.0 / a
    delta = total
    for _ in range(MAX_ITER):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * EPS:
            break
    return total * _gamma_prefactor(a, x)


def _gamma_continued_fraction(a: float, x: float) -> float:
    """Q(a, x) by modified Lentz; converges fast for x >= a + 1"""
    b = x + 1.0 - a
    c = 1.0 / FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < FPMIN:
            d = FPMIN
        c = b + an / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return _gamma_prefactor(a, x) * h


def _check_gamma_args(a: float, x: float):
    if a <= 0:
        raise DomainError(f"incomplete gamma needs a > 0, got {a}")
    if x < 0:
        raise DomainError(f"incomplete gamma needs x >= 0, got {x}")


def regularized_gamma_p(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x)"""
    _check_gamma_args(a, x)
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x))
    return max(0.0, 1.0 - _gamma_continued_fraction(a, x))


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = 1 - P(a, x)"""
    _check_gamma_args(a, x)
    if x == 0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x))
    return min(1.0, _gamma_continued_fraction(a, x))


# ---------------------------------------------------------------------------
# Incomplete beta
# ---------------------------------------------------------------------------

def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAX_ITER):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if abs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return h


def regularized_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)"""
    if a <= 0 or b <= 0:
        raise DomainError(f"incomplete beta needs a, b > 0, got {a}, {b}")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = float(gammaln(a + b) - gammaln(a) - gammaln(b)) + a * math.log(x) + b * math.log1p(-x)
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return min(1.0, front * _beta_continued_fraction(a, b, x) / a)
    return max(0.0, 1.0 - front * _beta_continued_fraction(b, a, 1.0 - x) / b)


# ---------------------------------------------------------------------------
# Normal
# ---------------------------------------------------------------------------

def erfc(u: float) -> float:
    """Complementary error function via Q(1/2, u^2)"""
    if u >= 0:
        return regularized_gamma_q(0.5, u * u)
    return 1.0 + regularized_gamma_p(0.5, u * u)


def normal_cdf(z: float) -> float:
    return 0.5 * erfc(-z / SQRT2)


def normal_sf(z: float) -> float:
    return 0.5 * erfc(z / SQRT2)


def normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / SQRT2PI


_PPF_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
          1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_PPF_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
          6.680131188771972e+01, -1.328068155288572e+01)
_PPF_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
          -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_PPF_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00, 3.754408661907416e+00)
_PPF_LOW = 0.02425


def _tail_rational(q: float) -> float:
    c, d = _PPF_C, _PPF_D
    num = ((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]
    den = (((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0
    return num / den


def normal_ppf(p: float) -> float:
    """Inverse normal CDF: rational approximation refined by one Halley step"""
    if not 0.0 < p < 1.0:
        raise DomainError(f"normal quantile needs 0 < p < 1, got {p}")
    if p < _PPF_LOW:
        x = _tail_rational(math.sqrt(-2.0 * math.log(p)))
    elif p <= 1.0 - _PPF_LOW:
        q = p - 0.5
        r = q * q
        a, b = _PPF_A, _PPF_B
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
        x /= ((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0
    else:
        x = -_tail_rational(math.sqrt(-2.0 * math.log1p(-p)))
    error = normal_cdf(x) - p if p < 0.5 else (1.0 - p) - normal_sf(x)
    u = error * SQRT2PI * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


# ---------------------------------------------------------------------------
# Student t, F, chi-square
# ---------------------------------------------------------------------------

def _check_df(*dfs: float):
    for df in dfs:
        if not df > 0:
            raise DomainError(f"degrees of freedom must be positive, got {df}")


def t_sf(t: float, df: float) -> float:
    """P(T >= t)"""
    _check_df(df)
    if math.isinf(t):
        return 0.0 if t > 0 else 1.0
    half_two_tail = 0.5 * regularized_beta(0.5 * df, 0.5, df / (df + t * t))
    return half_two_tail if t >= 0 else 1.0 - half_two_tail


def t_cdf(t: float, df: float) -> float:
    """P(T <= t)"""
    return t_sf(-t, df)


def f_cdf(f: float, d1: float, d2: float) -> float:
    _check_df(d1, d2)
    if f <= 0:
        return 0.0
    if math.isinf(f):
        return 1.0
    return regularized_beta(0.5 * d1, 0.5 * d2, d1 * f / (d1 * f + d2))


def f_sf(f: float, d1: float, d2: float) -> float:
    _check_df(d1, d2)
    if f <= 0:
        return 1.0
    if math.isinf(f):
        return 0.0
    return regularized_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * f))


def chi2_cdf(x: float, df: float) -> float:
    _check_df(df)
    if x <= 0:
        return 0.0
    return regularized_gamma_p(0.5 * df, 0.5 * x)


def chi2_sf(x: float, df: float) -> float:
    _check_df(df)
    if x <= 0:
        return 1.0
    return regularized_gamma_q(0.5 * df, 0.5 * x)


# ---------------------------------------------------------------------------
# Kolmogorov
# ---------------------------------------------------------------------------

_KOLMOGOROV_SWITCH = 1.18


def _kolmogorov_small(x: float) -> float:
    """CDF by the series sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2))"""
    total = 0.0
    factor = -math.pi * math.pi / (8.0 * x * x)
    for k in range(1, 200):
        term = math.exp((2 * k - 1) ** 2 * factor)
        total += term
        if term < EPS * total or term == 0.0:
            break
    return SQRT2PI / x * total


def _kolmogorov_large(x: float) -> float:
    """Survival by the alternating series 2 sum (-1)^(k-1) exp(-2 k^2 x^2)"""
    total = 0.0
    for k in range(1, 200):
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 == 1 else -term
        if term < EPS * abs(total) or term == 0.0:
            break
    return 2.0 * total


def kolmogorov_cdf(x: float) -> float:
    """Limiting distribution of sqrt(n) * D_n"""
    if x <= 0:
        return 0.0
    if x < _KOLMOGOROV_SWITCH:
        return min(1.0, max(0.0, _kolmogorov_small(x)))
    return min(1.0, max(0.0, 1.0 - _kolmogorov_large(x)))


def kolmogorov_sf(x: float) -> float:
    if x <= 0:
        return 1.0
    if x < _KOLMOGOROV_SWITCH:
        return min(1.0, max(0.0, 1.0 - _kolmogorov_small(x)))
    return min(1.0, max(0.0, _kolmogorov_large(x)))


# ---------------------------------------------------------------------------
# Tails
# ---------------------------------------------------------------------------

def tail_p_value(cdf: float, sf: float, tail: str) -> float:
    """
    p-value for an observed statistic given its lower and upper tail probabilities.

    Two-sided p is twice the smaller tail, capped at 1; it is never a naive
    doubling of one fixed tail.
    """
    if tail == "two-sided":
        return min(1.0, 2.0 * min(cdf, sf))
    if tail == "greater":
        return sf
    if tail == "less":
        return cdf
    raise DomainError(f"unknown tail '{tail}'")
