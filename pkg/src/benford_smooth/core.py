"""Newcomb-Benford law, its moments, orthonormal polynomials and digit extraction.

The orthonormal system is built from the moment matrix of the law.  The
moments are irrational, so the whole construction is carried out with
``mpmath`` at 60 significant digits and only the final coefficients are
rounded to double precision.  Rounding earlier (moments, matrix inverse)
is enough to lose orthonormality at degree 5 and above.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal
from functools import lru_cache
from numbers import Real
from typing import Iterable, Literal, Sequence

import mpmath
import numpy as np

from .errors import (
    DigitParseError,
    DomainError,
    EmptySampleError,
    InvalidObservationError,
    ZeroObservationError,
)

DIGITS = np.arange(1, 10)
MAX_DEGREE = 8
MAX_SMOOTH_ORDER = 7
WORKING_DPS = 60

Policy = Literal["strict", "absolute", "skip-invalid"]
POLICIES = ("strict", "absolute", "skip-invalid")


@dataclass(frozen=True)
class Pmf9:
    """Probability vector over the digits 1..9."""

    p: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float).reshape(-1)
        if p.shape != (9,):
            raise DomainError(f"a digit pmf needs 9 entries, got {p.shape[0]}")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise DomainError("pmf entries must be finite and non-negative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise DomainError(f"pmf sums to {math.fsum(p)!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def __getitem__(self, digit: int) -> float:
        """Probability of ``digit`` (1-based)."""
        if not 1 <= digit <= 9:
            raise IndexError(digit)
        return float(self.p[digit - 1])

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.p)
        c[-1] = 1.0
        return c


@dataclass(frozen=True)
class DigitSample:
    """Counts ``n_1..n_9`` of first significant digits in a sample."""

    counts: np.ndarray
    skipped: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        c = np.asarray(self.counts).reshape(-1)
        if c.shape != (9,):
            raise DomainError(f"digit counts need 9 entries, got {c.shape[0]}")
        if not np.all(c == np.round(c)) or np.any(c < 0):
            raise DomainError("digit counts must be non-negative integers")
        c = c.astype(np.int64)
        if c.sum() < 1:
            raise EmptySampleError("a digit sample needs at least one observation")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def proportions(self) -> np.ndarray:
        return self.counts / self.n

    @classmethod
    def from_digits(cls, digits: Iterable[int]) -> "DigitSample":
        d = np.asarray(list(digits), dtype=np.int64)
        if d.size and (d.min() < 1 or d.max() > 9):
            raise DomainError("digits must lie in 1..9")
        return cls(np.bincount(d, minlength=10)[1:])

    def expand(self) -> np.ndarray:
        """The sorted list of individual digits behind the counts."""
        return np.repeat(DIGITS, self.counts)


@dataclass(frozen=True)
class OrthoPolynomial:
    """Polynomial ``h_k`` with coefficients in ascending powers."""

    degree: int
    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) != self.degree + 1:
            raise DomainError("a degree-k polynomial needs k + 1 coefficients")
        if not self.coeffs[-1] > 0:
            raise DomainError("leading coefficient must be positive")

    def __call__(self, x):
        return eval_polynomial(self, x)


def benford_pmf() -> Pmf9:
    """The Newcomb-Benford law ``log10(1 + 1/d)``."""
    return Pmf9(_benford_array())


@lru_cache(maxsize=1)
def _benford_array() -> np.ndarray:
    p = np.log10(1.0 + 1.0 / DIGITS)
    p.setflags(write=False)
    return p


def benford_cdf() -> np.ndarray:
    c = np.cumsum(_benford_array())
    c[-1] = 1.0
    return c


def _mp_benford() -> list:
    return [mpmath.log10(1 + mpmath.mpf(1) / d) for d in range(1, 10)]


def benford_moment(k: int) -> float:
    """Raw moment ``E[D**k]`` of the first digit under the Benford law."""
    if k < 0:
        raise DomainError("moment order must be non-negative")
    with mpmath.workdps(WORKING_DPS):
        return float(_mp_moments(k)[k])


def _mp_moments(top: int) -> list:
    pi = _mp_benford()
    return [mpmath.fsum(mpmath.mpf(d) ** j * pi[d - 1] for d in range(1, 10)) for j in range(top + 1)]


@lru_cache(maxsize=1)
def _mp_polynomial_coeffs() -> tuple[tuple, ...]:
    """High-precision coefficients of h_1..h_8, as mpf tuples."""
    out = []
    with mpmath.workdps(WORKING_DPS):
        mu = _mp_moments(2 * MAX_DEGREE)
        for k in range(1, MAX_DEGREE + 1):
            M = mpmath.matrix([[mu[i + j] for j in range(k)] for i in range(k)])
            m = mpmath.matrix([mu[k + i] for i in range(k)])
            w = mpmath.lu_solve(M, m)
            c = mu[2 * k] - sum(m[i] * w[i] for i in range(k))
            if c <= 0:
                raise DomainError(f"degree {k} is degenerate on a 9-point support")
            scale = 1 / mpmath.sqrt(c)
            coeffs = tuple(-w[i] * scale for i in range(k)) + (scale,)
            out.append(coeffs)
    return tuple(out)


def build_orthonormal_polynomials(k_max: int) -> list[OrthoPolynomial]:
    """Orthonormal polynomials ``h_1..h_k_max`` for the Benford law.

    ``h_k(x) = c_k**-0.5 * (x**k - (1, x, ..., x**(k-1)) M_k^-1 mu_k)`` where
    ``M_k`` is the Hankel matrix of moments ``mu_0..mu_{2k-2}``, ``mu_k`` the
    vector ``(mu_k, ..., mu_{2k-1})`` and ``c_k = mu_2k - mu_k' M_k^-1 mu_k``.

    Parameters
    ----------
    k_max : int
        Highest degree, between 1 and 8.

    Returns
    -------
    list of OrthoPolynomial
        ``h_1`` first.  Together with ``h_0 = 1`` they are orthonormal under
        the Benford law to roughly double precision.
    """
    if not 1 <= k_max <= MAX_DEGREE:
        raise DomainError(f"k_max must be in [1, {MAX_DEGREE}], got {k_max}")
    return [
        OrthoPolynomial(k, tuple(float(c) for c in coeffs))
        for k, coeffs in enumerate(_mp_polynomial_coeffs()[:k_max], start=1)
    ]


def eval_polynomial(p: OrthoPolynomial, x):
    """Horner evaluation; ``x`` may be a scalar or an array."""
    acc = np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


@lru_cache(maxsize=None)
def polynomial_table(k_max: int = MAX_SMOOTH_ORDER) -> np.ndarray:
    """Matrix ``H[d-1, k-1] = h_k(d)`` evaluated at extended precision.

    Used for every count-based smooth statistic so that the statistics do
    not inherit the cancellation of evaluating high-degree polynomials in
    double precision.
    """
    if not 1 <= k_max <= MAX_DEGREE:
        raise DomainError(f"k_max must be in [1, {MAX_DEGREE}], got {k_max}")
    coeffs = _mp_polynomial_coeffs()[:k_max]
    table = np.empty((9, k_max))
    with mpmath.workdps(WORKING_DPS):
        for k, cs in enumerate(coeffs):
            for d in range(1, 10):
                table[d - 1, k] = float(mpmath.polyval(list(reversed(cs)), d))
    table.setflags(write=False)
    return table


_NUMBER = re.compile(
    r"""^\s*(?P<sign>[+-]?)
    (?P<mant>\d*(?:\.\d*)?)
    (?:[eE](?P<exp>[+-]?\d+))?\s*$""",
    re.VERBOSE,
)


def _digit_from_text(text: str, policy: Policy) -> int:
    m = _NUMBER.match(text)
    if m is None or not any(ch.isdigit() for ch in m.group("mant")):
        low = text.strip().lower().lstrip("+-")
        if low in {"inf", "infinity", "nan"}:
            raise InvalidObservationError(f"non-finite observation {text.strip()!r}")
        raise DigitParseError(f"cannot read {text!r} as a number")
    first = next((ch for ch in m.group("mant") if ch in "123456789"), None)
    if first is None:
        raise ZeroObservationError("zero has no first significant digit")
    if m.group("sign") == "-" and policy != "absolute":
        raise InvalidObservationError(f"negative observation {text.strip()!r}")
    return int(first)


def first_significant_digit(x, policy: Policy = "strict") -> int:
    """Leading non-zero decimal digit of ``x``.

    Strings are scanned character by character, so ``"0.1"`` yields 1 even
    though its binary float is slightly above one tenth.  Floats go through
    their shortest round-trip ``repr``.

    ``policy="absolute"`` accepts negative values; any other policy rejects
    them.  Zero and non-finite values are always rejected.
    """
    if isinstance(x, str):
        return _digit_from_text(x, policy)
    if isinstance(x, bool):
        raise DigitParseError("booleans are not observations")
    if isinstance(x, (int, np.integer)):
        return _digit_from_text(str(int(x)), policy)
    if isinstance(x, Decimal):
        if not x.is_finite():
            raise InvalidObservationError(f"non-finite observation {x}")
        return _digit_from_text(format(x, "e"), policy)
    if isinstance(x, (Real, np.floating)):
        xf = float(x)
        if not math.isfinite(xf):
            raise InvalidObservationError(f"non-finite observation {xf}")
        return _digit_from_text(repr(xf), policy)
    raise DigitParseError(f"unsupported observation type {type(x).__name__}")


def tabulate_digits(values: Iterable, policy: Policy = "strict") -> DigitSample:
    """Count first significant digits of ``values``.

    Zeros carry no digit and are skipped under every policy.  Negative
    values raise under ``strict``, are folded to their magnitude under
    ``absolute`` and skipped under ``skip-invalid``, which also skips
    unparseable and non-finite records.  The number of skipped records is
    kept on the returned sample.
    """
    if policy not in POLICIES:
        raise DomainError(f"unknown policy {policy!r}; expected one of {POLICIES}")
    counts = np.zeros(9, dtype=np.int64)
    skipped = 0
    for v in values:
        try:
            d = first_significant_digit(v, policy="absolute" if policy == "absolute" else "strict")
        except ZeroObservationError:
            skipped += 1
            continue
        except (InvalidObservationError, DigitParseError):
            if policy != "skip-invalid":
                raise
            skipped += 1
            continue
        counts[d - 1] += 1
    if counts.sum() == 0:
        raise EmptySampleError(f"no valid observation ({skipped} skipped)")
    return DigitSample(counts, skipped=skipped)


def as_counts(sample: DigitSample | Sequence[float] | np.ndarray) -> np.ndarray:
    """Count array of shape ``(..., 9)`` as floats, from a sample or raw counts."""
    if isinstance(sample, DigitSample):
        return sample.counts.astype(float)
    c = np.asarray(sample, dtype=float)
    if c.shape[-1] != 9:
        raise DomainError("count arrays must have 9 columns")
    return c
