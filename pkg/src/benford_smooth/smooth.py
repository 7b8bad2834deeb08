"""Neyman smooth statistics for the Benford law and their tests.

Everything here works from digit counts: ``U_k = n**-0.5 * sum_d n_d h_k(d)``
and ``T_K = U_1**2 + ... + U_K**2``.  The count-level helpers accept arrays
of shape ``(..., 9)`` so the Monte Carlo engine can evaluate thousands of
replications in one call.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Literal, Optional

import numpy as np
from scipy import stats

from .core import MAX_SMOOTH_ORDER, DigitSample, as_counts, polynomial_table
from .errors import ConfigurationError, DomainError

if TYPE_CHECKING:
    from .montecarlo import McConfig

Calibration = Literal["auto", "asymptotic", "monte-carlo"]
DEFAULT_KMAX = 5
MC_THRESHOLD_N = 100


@dataclass(frozen=True)
class SmoothStatistics:
    """Components ``U_1..U_K`` and partial sums ``T_1..T_K``."""

    u: np.ndarray
    t: np.ndarray
    n: int


@dataclass(frozen=True)
class TestResult:
    """Outcome of one goodness-of-fit test.

    ``reject`` is ``statistic > critical_value``.  ``replications`` and
    ``seed`` are set when the critical value comes from simulation.
    """

    test_id: str
    statistic: float
    critical_value: float
    reject: bool
    calibration: str
    alpha: float
    p_value: Optional[float] = None
    selected_k: Optional[int] = None
    replications: Optional[int] = None
    seed: Optional[int] = None

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        return {
            "test": self.test_id,
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "reject": self.reject,
            "alpha": self.alpha,
            "calibration": self.calibration,
            "selected_k": self.selected_k,
            "replications": self.replications,
            "seed": self.seed,
        }


def _check_order(K: int, name: str = "K") -> None:
    if not 1 <= K <= MAX_SMOOTH_ORDER:
        raise DomainError(f"{name} must be in [1, {MAX_SMOOTH_ORDER}], got {K}")


def components_from_counts(counts, K: int) -> np.ndarray:
    """``U_1..U_K`` for count arrays of shape ``(..., 9)``."""
    _check_order(K)
    c = as_counts(counts)
    n = c.sum(axis=-1, keepdims=True)
    return (c @ polynomial_table(MAX_SMOOTH_ORDER)[:, :K]) / np.sqrt(n)


def partial_sums_from_counts(counts, K: int) -> np.ndarray:
    """``T_1..T_K`` for count arrays of shape ``(..., 9)``."""
    return np.cumsum(components_from_counts(counts, K) ** 2, axis=-1)


def smooth_components(sample: DigitSample, K: int) -> SmoothStatistics:
    """Smooth components and partial sums of orders 1..K."""
    u = components_from_counts(sample, K)
    return SmoothStatistics(u=u, t=np.cumsum(u**2), n=sample.n)


def select_order(t: np.ndarray, n) -> np.ndarray:
    """Penalised argmax ``1 + argmax_k (T_k - k log n)``, smallest k on ties.

    ``t`` has shape ``(..., K_max)``; ``n`` broadcasts against its leading axes.
    """
    t = np.asarray(t, dtype=float)
    k = np.arange(1, t.shape[-1] + 1)
    penalised = t - k * np.log(np.asarray(n, dtype=float))[..., None]
    return np.argmax(penalised, axis=-1) + 1


def data_driven_from_counts(counts, k_max: int = DEFAULT_KMAX) -> tuple[np.ndarray, np.ndarray]:
    """Selected orders and ``T_Khat`` for count arrays of shape ``(..., 9)``."""
    _check_order(k_max, "K_max")
    c = as_counts(counts)
    t = partial_sums_from_counts(c, k_max)
    k_hat = select_order(t, c.sum(axis=-1))
    return k_hat, np.take_along_axis(t, (k_hat - 1)[..., None], axis=-1)[..., 0]


def data_driven_select(sample: DigitSample, k_max: int = DEFAULT_KMAX) -> tuple[int, float]:
    """Order chosen by the Schwarz-type rule and the statistic at that order."""
    k_hat, t = data_driven_from_counts(sample, k_max)
    return int(k_hat), float(t)


def resolve_calibration(calibration: Calibration, n: int) -> str:
    if calibration == "auto":
        return "monte-carlo" if n < MC_THRESHOLD_N else "asymptotic"
    if calibration not in ("asymptotic", "monte-carlo"):
        raise ConfigurationError(f"unknown calibration {calibration!r}")
    return calibration


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must be in (0, 1), got {alpha}")


def _asymptotic_result(test_id, statistic, df, alpha, selected_k=None) -> TestResult:
    crit = float(stats.chi2.ppf(1 - alpha, df))
    return TestResult(
        test_id=test_id,
        statistic=statistic,
        critical_value=crit,
        reject=bool(statistic > crit),
        calibration="asymptotic",
        alpha=alpha,
        p_value=float(stats.chi2.sf(statistic, df)),
        selected_k=selected_k,
    )


def smooth_test(
    sample: DigitSample,
    K: int = 2,
    alpha: float = 0.05,
    calibration: Calibration = "auto",
    mc_config: Optional["McConfig"] = None,
    workers: int = 1,
) -> TestResult:
    """Test of order K: reject when ``T_K`` exceeds its (1 - alpha) quantile.

    The asymptotic quantile is that of chi-square with K degrees of freedom.
    With ``calibration="auto"`` samples smaller than 100 are calibrated by
    simulation, which needs ``mc_config``.
    """
    _check_order(K)
    _check_alpha(alpha)
    stat = float(smooth_components(sample, K).t[-1])
    method = resolve_calibration(calibration, sample.n)
    if method == "asymptotic":
        return _asymptotic_result(f"T{K}", stat, K, alpha)
    from .montecarlo import mc_test

    return mc_test(f"T{K}", stat, sample.n, alpha, mc_config, workers=workers)


def data_driven_test(
    sample: DigitSample,
    k_max: int = DEFAULT_KMAX,
    alpha: float = 0.05,
    calibration: Calibration = "auto",
    mc_config: Optional["McConfig"] = None,
    workers: int = 1,
) -> TestResult:
    """Data-driven smooth test based on ``T_Khat``.

    Asymptotically ``T_Khat`` is chi-square with one degree of freedom.  The
    simulated calibration reruns the order selection on every null
    replication.
    """
    _check_alpha(alpha)
    k_hat, stat = data_driven_select(sample, k_max)
    method = resolve_calibration(calibration, sample.n)
    test_id = "Tkhat" if k_max == DEFAULT_KMAX else f"Tkhat{k_max}"
    if method == "asymptotic":
        return _asymptotic_result(test_id, stat, 1, alpha, selected_k=k_hat)
    from .montecarlo import mc_test

    res = mc_test(test_id, stat, sample.n, alpha, mc_config, workers=workers)
    return replace(res, selected_k=k_hat)
