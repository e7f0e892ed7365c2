"""Chi-square tail bounds, Gaussian KL divergences and the two-point risk bound.

The exact chi-square tails come from a self-contained regularised
incomplete gamma routine (power series below ``x = a + 1``, Lentz continued
fraction above), which the tests cross-check against scipy.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CorrArmsError,
    DimensionMismatch,
    DomainError,
    ParameterOrderViolated,
    SingularSigma0,
    SingularSigma1,
)
from .model import Sampler, lower_bound_entries, prime_rho, validate_matrix
from .objective import alpha, beta

# conservative stand-ins for the unspecified universal constants
KL_SANDWICH_CONSTANT = 10.0
TWIN_KL_CONSTANT = 10.0

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


# ---------------------------------------------------------------------------
# regularised incomplete gamma


def _gamma_series(a, x):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError(f"gamma series did not converge for a={a}, x={x}")
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cfrac(a, x):
    # Q(a, x) via the modified Lentz evaluation of the Legendre continued fraction
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
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
    else:  # pragma: no cover
        raise ArithmeticError(f"gamma continued fraction did not converge for a={a}, x={x}")
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_lower(a, x):
    """Regularised lower incomplete gamma ``P(a, x)``."""
    if a <= 0 or x < 0:
        raise DomainError(f"need a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _gamma_series(a, x)
    return 1.0 - _gamma_cfrac(a, x)


def gammainc_upper(a, x):
    """Regularised upper incomplete gamma ``Q(a, x) = 1 - P(a, x)``."""
    if a <= 0 or x < 0:
        raise DomainError(f"need a > 0 and x >= 0, got a={a}, x={x}")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gamma_series(a, x)
    return _gamma_cfrac(a, x)


def chi2_cdf(x, dof):
    return gammainc_lower(dof / 2.0, x / 2.0)


def chi2_sf(x, dof):
    return gammainc_upper(dof / 2.0, x / 2.0)


# ---------------------------------------------------------------------------
# chi-square concentration


@dataclass(frozen=True)
class TailBound:
    """Tail bounds for ``Y / t`` with ``Y`` chi-square on ``t`` degrees of freedom.

    ``lower_bound`` bounds ``P(Y/t <= 1/theta)``.  ``upper_bound`` and the
    sharper ``upper_bound_sharp`` both bound ``P(Y/t >= theta)``.
    """

    t: int
    theta: float
    lower_bound: float
    upper_bound: float
    upper_bound_sharp: float


def _check_t_theta(t, theta):
    if t < 1 or theta < 1:
        raise DomainError(f"need t >= 1 and theta >= 1, got t={t}, theta={theta}")


def chi_square_tail_bounds(t, theta):
    _check_t_theta(t, theta)
    common = math.exp(-t * alpha(theta))
    return TailBound(
        t=int(t),
        theta=float(theta),
        lower_bound=common,
        upper_bound=common,
        upper_bound_sharp=math.exp(-0.5 * t * beta(theta)),
    )


def chi_square_exact_tails(t, theta):
    """Exact ``(P(Y/t <= 1/theta), P(Y/t >= theta))``."""
    _check_t_theta(t, theta)
    return chi2_cdf(t / theta, t), chi2_sf(t * theta, t)


# ---------------------------------------------------------------------------
# KL divergences


def _check_pair(rho0, rho1):
    if not (1.0 > rho0 > rho1 >= 0.0):
        raise ParameterOrderViolated(f"need 1 > rho0 > rho1 >= 0, got {rho0}, {rho1}")


def kl_univariate(m0, v0, m1, v1):
    """``KL(N(m0, v0) || N(m1, v1))`` for positive variances."""
    if v0 <= 0 or v1 <= 0:
        raise DomainError("variances must be positive")
    return 0.5 * (math.log(v1 / v0) + v0 / v1 - 1.0 + (m1 - m0) ** 2 / v1)


def kl_bivariate_correlation(rho0, rho1):
    """KL between zero-mean unit-variance pairs with correlations ``rho0 > rho1``.

    Equals ``alpha(R) + beta((1 + rho0) / (1 + rho1)) / 2`` with
    ``R = (1 - rho1) / (1 - rho0)``: the difference coordinate contributes
    ``alpha(R)`` and the sum coordinate half of ``beta``.
    """
    _check_pair(rho0, rho1)
    R = (1.0 - rho1) / (1.0 - rho0)
    kl = alpha(R) + 0.5 * beta((1.0 + rho0) / (1.0 + rho1))
    if kl < alpha(R):
        raise AssertionError("KL fell below alpha(R)")
    return kl


def kl_gaussian_general(mu0, sigma0, mu1, sigma1):
    """``KL(N(mu0, sigma0) || N(mu1, sigma1))`` in any dimension."""
    mu0 = np.atleast_1d(np.asarray(mu0, dtype=np.float64))
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=np.float64))
    s0 = np.atleast_2d(np.asarray(sigma0, dtype=np.float64))
    s1 = np.atleast_2d(np.asarray(sigma1, dtype=np.float64))
    k = mu0.shape[0]
    if mu1.shape != (k,) or s0.shape != (k, k) or s1.shape != (k, k):
        raise DimensionMismatch(
            f"shapes {mu0.shape}, {s0.shape}, {mu1.shape}, {s1.shape} do not agree"
        )
    try:
        l1 = np.linalg.cholesky(s1)
    except np.linalg.LinAlgError:
        raise SingularSigma1("sigma1 must be positive definite") from None
    try:
        l0 = np.linalg.cholesky(s0)
    except np.linalg.LinAlgError:
        raise SingularSigma0("sigma0 is singular; log det is undefined") from None
    logdet1 = 2.0 * np.sum(np.log(np.diag(l1)))
    logdet0 = 2.0 * np.sum(np.log(np.diag(l0)))
    trace = np.trace(np.linalg.solve(s1, s0))
    diff = mu1 - mu0
    quad = diff @ np.linalg.solve(s1, diff)
    return 0.5 * (logdet1 - logdet0 + trace - k + quad)


def _family_rhos(instance):
    if instance.family != "lower_bound" or instance.rhos is None:
        raise CorrArmsError("need an instance from make_lower_bound_instance")
    rho_h, rho = instance.rhos[0], instance.rhos[1]
    return rho_h, rho, prime_rho(rho_h, rho)


def kl_sigma_prime(instance):
    """``KL(N(0, Sigma') || N(0, Sigma))`` for a lower-bound instance.

    Both matrices are singular when ``h >= 3``; conditioning on the block
    coordinate reduces the divergence to one univariate Gaussian pair.
    """
    _, rho, rp = _family_rhos(instance)
    v, vp = 1.0 - rho * rho, 1.0 - rp * rp
    kl = 0.5 * (math.log(v / vp) + vp / v - 1.0 + (rho - rp) ** 2 / v)
    bound = TWIN_KL_CONSTANT * alpha(instance.ratios[instance.h])
    if kl > bound:
        raise AssertionError(f"KL {kl} exceeds {TWIN_KL_CONSTANT} * alpha(R_(h+1)) = {bound}")
    return kl


def kl_sigma_prime_monte_carlo(instance, n_samples, rng):
    """Monte Carlo mean of the log-likelihood ratio under ``Sigma'``.

    Only arm 0 (the block) and arm ``h`` differ in law between the two
    models once the block value is fixed, so the ratio of the bivariate
    densities of those two coordinates is the full likelihood ratio.
    Returns ``(estimate, standard_error)``.
    """
    _, rho, rp = _family_rhos(instance)
    rhos = list(instance.rhos)
    rhos[1] = rp
    prime = validate_matrix(lower_bound_entries(rhos, instance.h))
    _, x = Sampler(prime, rng).draw([0, instance.h], n_samples)
    llr = _bivariate_logpdf(x, rp) - _bivariate_logpdf(x, rho)
    return float(llr.mean()), float(llr.std(ddof=1) / math.sqrt(n_samples))


def _bivariate_logpdf(x, rho):
    a, b = x[:, 0], x[:, 1]
    det = 1.0 - rho * rho
    q = (a * a - 2.0 * rho * a * b + b * b) / det
    return -math.log(2.0 * math.pi) - 0.5 * math.log(det) - 0.5 * q


def risk_lower_bound(kl, t):
    """``exp(-t * kl) / 4``: no test on ``t`` i.i.d. draws does better in the worst case."""
    if kl < 0 or t < 1:
        raise DomainError(f"need kl >= 0 and t >= 1, got kl={kl}, t={t}")
    return 0.25 * math.exp(-t * kl)


def phi_star_risk_bound(rho0, rho1, t):
    """``exp(-t * alpha(sqrt(R)))``, the maximal-risk bound of the threshold test."""
    _check_pair(rho0, rho1)
    R = (1.0 - rho1) / (1.0 - rho0)
    return math.exp(-t * alpha(math.sqrt(R)))
