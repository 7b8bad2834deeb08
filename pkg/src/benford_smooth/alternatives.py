"""Parametric first-digit laws that nest the Benford law, and a digit sampler.

Families and the parameter value that gives back Benford:

=============  ==========================================  ===========
family         parameter                                   Benford at
=============  ==========================================  ===========
rodriguez      beta, any real                              beta = -1
pietronero     beta, any real                              beta = 1
hurlimann      beta > 0                                    beta = 1, 2
mixture        beta in [0, 1]                              beta = 0
contaminated1  beta in [0, 0.6]                            beta = 0
contaminated2  gamma >= -2, beta = 0.001 * (1 + gamma/2)   gamma = -2
=============  ==========================================  ===========
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import DIGITS, DigitSample, Pmf9, _benford_array
from .errors import DomainError

FAMILIES = ("rodriguez", "pietronero", "hurlimann", "mixture", "contaminated1", "contaminated2")

# Parameter value at which each family reduces to the Benford law.
NULL_PARAMETER = {
    "rodriguez": -1.0,
    "pietronero": 1.0,
    "hurlimann": 1.0,
    "mixture": 0.0,
    "contaminated1": 0.0,
    "contaminated2": -2.0,
}

SINGULAR_EPS = 1e-8
_LOG10 = math.log(10.0)


@dataclass(frozen=True)
class AlternativeSpec:
    """A family name and its parameter (gamma for ``contaminated2``)."""

    family: str
    beta: float

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        b = float(self.beta)
        if not math.isfinite(b):
            raise DomainError("family parameter must be finite")
        if self.family == "mixture" and not 0 <= b <= 1:
            raise DomainError(f"mixture weight must be in [0, 1], got {b}")
        if self.family == "contaminated1" and not 0 <= b <= 0.6:
            raise DomainError(f"contaminated1 parameter must be in [0, 0.6], got {b}")
        if self.family == "contaminated2" and b < -2:
            raise DomainError(f"contaminated2 gamma must be >= -2, got {b}")
        if self.family == "hurlimann" and b <= 0:
            raise DomainError(f"hurlimann parameter must be positive, got {b}")
        object.__setattr__(self, "beta", b)


def _power_ratio(s: float) -> np.ndarray:
    """``((d+1)**s - d**s) / (10**s - 1)`` for d = 1..9, stable for large |s|.

    Writes ``(d+1)**s - d**s = d**s * expm1(s * log(1 + 1/d))``; for s > 0
    every factor is rescaled by ``10**-s`` and combined in log space.
    """
    d = DIGITS.astype(float)
    step = s * np.log1p(1.0 / d)
    if s > 0:
        log_num = s * np.log(d / 10.0) + step + np.log(-np.expm1(-step))
        return np.exp(log_num) / -math.expm1(-s * _LOG10)
    return d**s * np.expm1(step) / math.expm1(s * _LOG10)


def rodriguez_pmf(beta: float) -> np.ndarray:
    if abs(beta + 1) < SINGULAR_EPS:
        return np.array(_benford_array())
    d = DIGITS.astype(float)
    if abs(beta) < SINGULAR_EPS:
        # Stigler's law
        return (1 + 10 / 9 * _LOG10 + d * np.log(d) - (d + 1) * np.log(d + 1)) / 9
    return (beta + 1) / (9 * beta) - _power_ratio(beta + 1) / beta


def pietronero_pmf(beta: float) -> np.ndarray:
    if abs(beta - 1) < SINGULAR_EPS:
        return np.array(_benford_array())
    return _power_ratio(1 - beta)


def hurlimann_pmf(beta: float) -> np.ndarray:
    lo = np.log10(DIGITS.astype(float))
    hi = np.log10(DIGITS + 1.0)
    return 0.5 * (hi**beta - lo**beta - (1 - hi) ** beta + (1 - lo) ** beta)


def mixture_pmf(beta: float) -> np.ndarray:
    return (1 - beta) * _benford_array() + beta / 9


def contaminated1_pmf(beta: float) -> np.ndarray:
    p = np.array(_benford_array())
    p[[0, 8]] += beta
    return p / (1 + 2 * beta)


def contaminated2_pmf(gamma: float) -> np.ndarray:
    beta = 0.001 * (1 + gamma / 2)
    p = np.array(_benford_array())
    p[5:] += (DIGITS[5:] - 5) * beta
    return p / (1 + 10 * beta)


_PMFS = {
    "rodriguez": rodriguez_pmf,
    "pietronero": pietronero_pmf,
    "hurlimann": hurlimann_pmf,
    "mixture": mixture_pmf,
    "contaminated1": contaminated1_pmf,
    "contaminated2": contaminated2_pmf,
}


def alternative_pmf(spec: AlternativeSpec) -> Pmf9:
    """First-digit law of ``spec`` as a validated :class:`Pmf9`.

    Rounding can leave the vector a few ulps away from summing to one, so
    it is renormalised; tiny negative round-off is clipped to zero.
    """
    p = _PMFS[spec.family](spec.beta)
    if np.any(p < -1e-12) or not np.all(np.isfinite(p)):
        raise DomainError(f"{spec.family}({spec.beta}) is not a probability vector")
    p = np.clip(p, 0.0, None)
    return Pmf9(p / math.fsum(p))


def sample_digits(pmf: Pmf9 | np.ndarray, n: int, rng: np.random.Generator) -> DigitSample:
    """``n`` independent draws by inverse-CDF lookup, returned as counts."""
    return DigitSample(draw_counts(pmf, n, rng))


def draw_counts(pmf: Pmf9 | np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    if n < 1:
        raise DomainError("sample size must be at least 1")
    cdf = pmf.cdf() if isinstance(pmf, Pmf9) else _cdf(np.asarray(pmf, dtype=float))
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return np.bincount(np.minimum(idx, 8), minlength=9)


def _cdf(p: np.ndarray) -> np.ndarray:
    c = np.cumsum(p)
    c[-1] = 1.0
    return c
