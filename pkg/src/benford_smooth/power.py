"""Analytic power of the order-K smooth test against a fixed alternative.

Under an alternative ``g`` the component vector ``U`` is approximately
normal with mean ``nu`` and covariance ``Sigma``, so ``T_K = |U|**2`` behaves
like ``sum_k lambda_k * chi2_1(delta_k**2)`` where ``lambda`` are the
eigenvalues of ``Sigma`` and ``delta = Lambda**-0.5 P' nu``.  The tail of that
weighted sum is approximated by a single noncentral chi-square whose
first four cumulants match (Liu, Tang and Zhang, 2009).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special, stats

from .core import MAX_SMOOTH_ORDER, Pmf9, polynomial_table
from .errors import ApproximationError, DomainError, NumericalError

EIGEN_FLOOR = 1e-10
DROP_DELTA_TOL = 1e-6
SERIES_RTOL = 1e-10


@dataclass(frozen=True)
class PowerProblem:
    g: Pmf9
    n: int
    K: int = 2
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if not 1 <= self.K <= MAX_SMOOTH_ORDER:
            raise DomainError(f"K must be in [1, {MAX_SMOOTH_ORDER}], got {self.K}")
        if self.n < 1:
            raise DomainError("n must be positive")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class SpectralForm:
    """Mean ``nu``, covariance ``sigma`` and its eigen-decomposition.

    ``eigvecs`` holds the eigenvectors as columns, so ``sigma`` equals
    ``eigvecs @ diag(lam) @ eigvecs.T``.  ``delta`` is zero on directions
    whose eigenvalue fell below ``EIGEN_FLOOR``.
    """

    nu: np.ndarray
    sigma: np.ndarray
    lam: np.ndarray
    eigvecs: np.ndarray
    delta: np.ndarray

    @property
    def kept(self) -> np.ndarray:
        return self.lam > EIGEN_FLOOR


def spectral_form(problem: PowerProblem) -> SpectralForm:
    H = polynomial_table()[:, : problem.K]
    g = problem.g.p
    nu = math.sqrt(problem.n) * (g @ H)
    sigma = (H * g[:, None]).T @ H - np.outer(nu, nu) / problem.n
    sigma = (sigma + sigma.T) / 2
    lam, P = np.linalg.eigh(sigma)
    if lam.min() < -EIGEN_FLOOR:
        raise NumericalError(f"covariance is not positive semidefinite (eigenvalue {lam.min():.3g})")
    w = P.T @ nu
    delta = np.zeros_like(w)
    kept = lam > EIGEN_FLOOR
    delta[kept] = w[kept] / np.sqrt(lam[kept])
    if np.any(np.abs(w[~kept]) >= DROP_DELTA_TOL):
        raise ApproximationError("alternative puts a shift on a zero-variance direction")
    return SpectralForm(nu=nu, sigma=sigma, lam=np.where(kept, lam, 0.0), eigvecs=P, delta=delta)


def cumulant_coefficients(lam: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """``c_i = sum_k lam_k**i * (1 + i * delta_k**2)`` for i = 1..4."""
    lam = np.asarray(lam, dtype=float)
    d2 = np.asarray(delta, dtype=float) ** 2
    return np.array([np.sum(lam**i * (1 + i * d2)) for i in range(1, 5)])


def ncx2_sf(x: float, df: float, nc: float) -> float:
    """Survival function of chi-square with real ``df`` and noncentrality ``nc``.

    Poisson(nc/2) mixture of central tails ``Q(df/2 + j, x/2)``, summed
    outward from the Poisson mode.  Each central tail is at most 1, so a
    side stops once its remaining Poisson mass is below ``SERIES_RTOL``
    times the running total.
    """
    if df <= 0:
        raise DomainError("degrees of freedom must be positive")
    if x <= 0:
        return 1.0
    if nc <= 0:
        return float(special.gammaincc(df / 2, x / 2))
    mu = nc / 2
    mode = int(mu)
    pois = stats.poisson(mu)

    def term(j: int) -> float:
        return float(pois.pmf(j) * special.gammaincc(df / 2 + j, x / 2))

    total = 0.0
    j = mode
    while True:
        total += term(j)
        if pois.sf(j) <= SERIES_RTOL * total or (total == 0 and pois.sf(j) < 1e-300):
            break
        j += 1
    for j in range(mode - 1, -1, -1):
        total += term(j)
        if pois.cdf(j - 1) <= SERIES_RTOL * total:
            break
    return min(total, 1.0)


def weighted_chisq_tail(lam, delta, t: float) -> float:
    """Moment-matching approximation of ``P[sum_k lam_k chi2_1(delta_k**2) > t]``."""
    lam = np.asarray(lam, dtype=float)
    if lam.size == 0 or np.any(lam <= 0):
        raise DomainError("weights must be positive")
    c1, c2, c3, c4 = cumulant_coefficients(lam, delta)
    s1 = c3 / c2**1.5
    s2 = c4 / c2**2
    a = 1 / (s1 - math.sqrt(s1**2 - s2)) if s1**2 > s2 else 1 / s1
    d2 = max(s1 * a**3 - a**2, 0.0)
    ell = a**2 - 2 * d2
    if not ell > 0:
        raise ApproximationError(f"matched degrees of freedom are not positive ({ell:.3g})")
    x = a * (t - c1) / math.sqrt(c2) + (ell + d2)
    return ncx2_sf(x, ell, d2)


def approximate_power(problem: PowerProblem, threshold: Optional[float] = None) -> float:
    """Approximate ``P_g[T_K > t]``.

    ``t`` defaults to the chi-square (1 - alpha) quantile with K degrees of
    freedom; pass a simulated critical value to approximate the power of
    the Monte Carlo calibrated test.
    """
    t = float(stats.chi2.ppf(1 - problem.alpha, problem.K)) if threshold is None else float(threshold)
    sf = spectral_form(problem)
    kept = sf.kept
    return weighted_chisq_tail(sf.lam[kept], sf.delta[kept], t)
