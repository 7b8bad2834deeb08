"""Smooth goodness-of-fit tests for the Newcomb-Benford first-digit law."""

__version__ = "0.1.0"

from .alternatives import AlternativeSpec, alternative_pmf, sample_digits
from .classic import (
    a_star,
    anderson_darling,
    cramer_von_mises,
    euclidean_d,
    kolmogorov,
    mad,
    max_deviation_m,
    pearson_chi_square,
    watson,
)
from .core import (
    DigitSample,
    OrthoPolynomial,
    Pmf9,
    benford_moment,
    benford_pmf,
    build_orthonormal_polynomials,
    eval_polynomial,
    first_significant_digit,
    tabulate_digits,
)
from .montecarlo import (
    CriticalValueCache,
    CriticalValueRecord,
    McConfig,
    PowerCurve,
    mc_critical_value,
    mc_power,
    power_curve,
)
from .power import PowerProblem, approximate_power, spectral_form, weighted_chisq_tail
from .smooth import (
    TestResult,
    data_driven_select,
    data_driven_test,
    smooth_components,
    smooth_test,
)

__all__ = [
    "AlternativeSpec",
    "CriticalValueCache",
    "CriticalValueRecord",
    "DigitSample",
    "McConfig",
    "OrthoPolynomial",
    "Pmf9",
    "PowerCurve",
    "PowerProblem",
    "TestResult",
    "a_star",
    "alternative_pmf",
    "anderson_darling",
    "approximate_power",
    "benford_moment",
    "benford_pmf",
    "build_orthonormal_polynomials",
    "cramer_von_mises",
    "data_driven_select",
    "data_driven_test",
    "euclidean_d",
    "eval_polynomial",
    "first_significant_digit",
    "kolmogorov",
    "mad",
    "max_deviation_m",
    "mc_critical_value",
    "mc_power",
    "pearson_chi_square",
    "power_curve",
    "sample_digits",
    "smooth_components",
    "smooth_test",
    "spectral_form",
    "tabulate_digits",
    "watson",
    "weighted_chisq_tail",
]
