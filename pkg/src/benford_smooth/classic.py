"""Competitor goodness-of-fit statistics for first-digit data.

All functions take a :class:`DigitSample` or a count array of shape
``(..., 9)`` and return one value per sample.  Count arrays may be real
valued, which lets exact-fit cases (``n_d = n * pi_d``) be evaluated.

The cumulative statistics use the discrete forms on the 9 digits:
``Z_d = S_d - S*_d`` with weights ``t_d = (pi_d + pi_{d+1}) / 2`` and the
wrap-around weight ``t_9 = (pi_9 + pi_1) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DIGITS, _benford_array, as_counts, benford_cdf

# Judge-Schechter constants: Benford mean digit and its distance to 9.
MEAN_DIGIT = 3.44027
MEAN_DIGIT_RANGE = 5.55973


@dataclass(frozen=True)
class CumulativePair:
    """Empirical and Benford CDFs on the digits, their gap and the weights."""

    s_hat: np.ndarray
    s_star: np.ndarray
    z: np.ndarray
    t: np.ndarray


def cdf_weights() -> np.ndarray:
    pi = _benford_array()
    return (pi + np.roll(pi, -1)) / 2


def _split(sample):
    c = as_counts(sample)
    n = c.sum(axis=-1)
    return c, n, c / n[..., None]


def cumulative_pair(sample) -> CumulativePair:
    _, _, p_hat = _split(sample)
    s_hat = np.cumsum(p_hat, axis=-1)
    s_star = benford_cdf()
    return CumulativePair(s_hat=s_hat, s_star=s_star, z=s_hat - s_star, t=cdf_weights())


def pearson_chi_square(sample) -> np.ndarray | float:
    """Pearson's statistic; chi-square with 8 degrees of freedom under the null."""
    c, n, _ = _split(sample)
    expected = n[..., None] * _benford_array()
    return _out(np.sum((c - expected) ** 2 / expected, axis=-1))


def cramer_von_mises(sample):
    """``W^2 = n * sum_d Z_d**2 t_d``."""
    _, n, _ = _split(sample)
    cp = cumulative_pair(sample)
    return _out(n * np.sum(cp.z**2 * cp.t, axis=-1))


def watson(sample):
    """``U^2 = n * sum_d (Z_d - Zbar)**2 t_d`` with ``Zbar = sum_d Z_d t_d``."""
    _, n, _ = _split(sample)
    cp = cumulative_pair(sample)
    zbar = np.sum(cp.z * cp.t, axis=-1, keepdims=True)
    return _out(n * np.sum((cp.z - zbar) ** 2 * cp.t, axis=-1))


def anderson_darling(sample):
    """Discrete Anderson-Darling over digits 1..8.

    The denominator uses the Benford CDF ``S*_d``, which lies strictly
    inside (0, 1) for d <= 8.
    """
    _, n, _ = _split(sample)
    cp = cumulative_pair(sample)
    s = cp.s_star[:8]
    return _out(n * np.sum(cp.z[..., :8] ** 2 * cp.t[:8] / (s * (1 - s)), axis=-1))


def kolmogorov(sample):
    """``sqrt(n) * max_d |S_d - S*_d|``."""
    _, n, _ = _split(sample)
    cp = cumulative_pair(sample)
    return _out(np.sqrt(n) * np.max(np.abs(cp.z), axis=-1))


def max_deviation_m(sample):
    """Largest absolute gap between observed and Benford proportions."""
    _, _, p_hat = _split(sample)
    return _out(np.max(np.abs(p_hat - _benford_array()), axis=-1))


def euclidean_d(sample):
    _, _, p_hat = _split(sample)
    return _out(np.sqrt(np.sum((p_hat - _benford_array()) ** 2, axis=-1)))


def mad(sample):
    """Mean absolute deviation of the nine proportions from Benford."""
    _, _, p_hat = _split(sample)
    return _out(np.mean(np.abs(p_hat - _benford_array()), axis=-1))


def a_star(sample):
    """Distance of the mean digit to its Benford value, scaled into [0, 1]."""
    _, _, p_hat = _split(sample)
    mean_digit = p_hat @ DIGITS
    return _out(np.abs(mean_digit - MEAN_DIGIT) / MEAN_DIGIT_RANGE)


def _out(x):
    return float(x) if np.ndim(x) == 0 else x
