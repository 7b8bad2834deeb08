"""Monte Carlo critical values and power estimates.

Replication ``r`` always draws from its own generator, seeded by
``SeedSequence(master_seed, spawn_key=(*stream, r))``.  Workers only
produce digit counts; statistics are evaluated afterwards on the pooled
count matrix in the parent process.  Results are therefore bit-identical
whatever the number of workers.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import classic
from .alternatives import FAMILIES, AlternativeSpec, alternative_pmf
from .core import MAX_SMOOTH_ORDER, Pmf9, _benford_array
from .errors import ConfigurationError, DomainError, RegistryError
from .smooth import DEFAULT_KMAX, TestResult, data_driven_from_counts, partial_sums_from_counts

log = logging.getLogger(__name__)

NULL_STREAM = (0,)
POWER_STREAM = 1

DESK_NULL_REPLICATIONS = 20_000
DESK_POWER_REPLICATIONS = 2_000
FULL_SCALE_NULL_REPLICATIONS = 50_000
FULL_SCALE_POWER_REPLICATIONS = 10_000


@dataclass(frozen=True)
class Statistic:
    id: str
    label: str
    fn: Callable[[np.ndarray], np.ndarray]


def _smooth(K: int) -> Callable[[np.ndarray], np.ndarray]:
    return lambda c: partial_sums_from_counts(c, K)[..., -1]


def _data_driven(k_max: int) -> Callable[[np.ndarray], np.ndarray]:
    return lambda c: data_driven_from_counts(c, k_max)[1]


def _build_registry() -> dict[str, Statistic]:
    reg = {}
    for K in range(1, MAX_SMOOTH_ORDER + 1):
        reg[f"T{K}"] = Statistic(f"T{K}", f"smooth T_{K}", _smooth(K))
        reg[f"Tkhat{K}"] = Statistic(f"Tkhat{K}", f"data-driven T_Khat (K_max={K})", _data_driven(K))
    reg["Tkhat"] = Statistic("Tkhat", f"data-driven T_Khat (K_max={DEFAULT_KMAX})", _data_driven(DEFAULT_KMAX))
    for sid, label, fn in [
        ("chi2", "Pearson chi-square", classic.pearson_chi_square),
        ("cvm", "Cramer-von Mises W^2", classic.cramer_von_mises),
        ("watson", "Watson U^2", classic.watson),
        ("ad", "Anderson-Darling A^2", classic.anderson_darling),
        ("ks", "Kolmogorov K_n", classic.kolmogorov),
        ("m", "max deviation m", classic.max_deviation_m),
        ("d", "Euclidean distance d", classic.euclidean_d),
        ("mad", "mean absolute deviation MAD", classic.mad),
        ("astar", "mean digit a*", classic.a_star),
    ]:
        reg[sid] = Statistic(sid, label, fn)
    return reg


REGISTRY = _build_registry()
DEFAULT_BATTERY = ("T2", "Tkhat", "chi2", "watson", "mad")
FULL_BATTERY = ("T2", "Tkhat", "chi2", "cvm", "watson", "ad", "ks", "m", "d", "mad", "astar")


def get_statistic(stat_id: str) -> Statistic:
    try:
        return REGISTRY[stat_id]
    except KeyError:
        raise RegistryError(f"unknown statistic {stat_id!r}; known: {sorted(REGISTRY)}") from None


def evaluate(stat_ids: Sequence[str], counts: np.ndarray) -> np.ndarray:
    """Statistics for each row of ``counts``; shape ``(rows, len(stat_ids))``."""
    counts = np.atleast_2d(counts)
    return np.column_stack([get_statistic(s).fn(counts) for s in stat_ids])


@dataclass(frozen=True)
class McConfig:
    """Replication count, master seed, sample size and level of a simulation."""

    replications: int
    master_seed: int
    n: int
    alpha: float = 0.05

    def __post_init__(self) -> None:
        if self.replications < 100:
            raise ConfigurationError(f"need at least 100 replications, got {self.replications}")
        if self.n < 1:
            raise ConfigurationError(f"sample size must be positive, got {self.n}")
        if not 0 < self.alpha < 1:
            raise DomainError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError("master_seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class CriticalValueRecord:
    statistic_id: str
    n: int
    alpha: float
    value: float
    replications: int
    master_seed: int

    @property
    def key(self) -> tuple:
        return (self.statistic_id, self.n, self.alpha, self.replications, self.master_seed)


@dataclass
class PowerCurve:
    family: str
    test_id: str
    n: int
    points: list[tuple[float, float, int]] = field(default_factory=list)


def child_rng(master_seed: int, r: int, stream: Sequence[int] = ()) -> np.random.Generator:
    """Generator for replication ``r`` of ``stream``."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(*stream, r))
    return np.random.Generator(np.random.PCG64(ss))


def _counts_block(cdf: np.ndarray, n: int, master_seed: int, stream: tuple, start: int, stop: int) -> np.ndarray:
    out = np.empty((stop - start, 9), dtype=np.int64)
    for i, r in enumerate(range(start, stop)):
        u = child_rng(master_seed, r, stream).random(n)
        out[i] = np.bincount(np.minimum(np.searchsorted(cdf, u, side="right"), 8), minlength=9)
    return out


def simulate_counts(
    pmf: Pmf9 | np.ndarray,
    n: int,
    replications: int,
    master_seed: int,
    stream: Sequence[int] = NULL_STREAM,
    workers: int = 1,
) -> np.ndarray:
    """Digit counts of ``replications`` samples of size ``n``, one row each."""
    p = pmf.p if isinstance(pmf, Pmf9) else np.asarray(pmf, dtype=float)
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    stream = tuple(int(s) for s in stream)
    if workers <= 1 or replications < 2 * workers:
        return _counts_block(cdf, n, master_seed, stream, 0, replications)
    edges = np.linspace(0, replications, workers * 4 + 1).astype(int)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_counts_block, cdf, n, master_seed, stream, int(a), int(b))
            for a, b in zip(edges[:-1], edges[1:])
            if b > a
        ]
        return np.concatenate([f.result() for f in futures])


def empirical_quantile(values: np.ndarray, q: float) -> float:
    """Linearly interpolated order statistic (Hyndman-Fan type 7)."""
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


def simulate_null(
    stat_ids: Sequence[str], n: int, replications: int, master_seed: int, workers: int = 1
) -> np.ndarray:
    """Null distribution sample of each statistic, shape ``(replications, len(stat_ids))``."""
    for s in stat_ids:
        get_statistic(s)
    counts = simulate_counts(_benford_array(), n, replications, master_seed, NULL_STREAM, workers)
    return evaluate(stat_ids, counts)


class CriticalValueCache:
    """Critical values persisted as CSV, one record per line.

    Header ``statistic_id,n,alpha,replications,master_seed,value``; the
    value is written with ``repr`` so a cache hit returns the exact float.
    With ``path=None`` the cache lives in memory only.
    """

    FIELDS = ("statistic_id", "n", "alpha", "replications", "master_seed", "value")

    def __init__(self, path: str | os.PathLike | None = None):
        self.path = Path(path) if path is not None else None
        self._records: dict[tuple, CriticalValueRecord] = {}
        if self.path is not None and self.path.exists():
            with self.path.open(newline="") as fh:
                for row in csv.DictReader(fh):
                    rec = CriticalValueRecord(
                        statistic_id=row["statistic_id"],
                        n=int(row["n"]),
                        alpha=float(row["alpha"]),
                        value=float(row["value"]),
                        replications=int(row["replications"]),
                        master_seed=int(row["master_seed"]),
                    )
                    self._records[rec.key] = rec

    def __len__(self) -> int:
        return len(self._records)

    def get(self, statistic_id: str, config: McConfig) -> Optional[CriticalValueRecord]:
        return self._records.get((statistic_id, config.n, config.alpha, config.replications, config.master_seed))

    def put(self, record: CriticalValueRecord) -> None:
        if record.key in self._records:
            return
        self._records[record.key] = record
        if self.path is None:
            return
        new = not self.path.exists() or self.path.stat().st_size == 0
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(self.FIELDS)
            w.writerow(
                [record.statistic_id, record.n, repr(record.alpha), record.replications, record.master_seed, repr(record.value)]
            )


def mc_critical_values(
    stat_ids: Iterable[str],
    config: McConfig,
    workers: int = 1,
    cache: Optional[CriticalValueCache] = None,
) -> dict[str, CriticalValueRecord]:
    """Critical values for several statistics from one shared set of null samples."""
    stat_ids = list(dict.fromkeys(stat_ids))
    out: dict[str, CriticalValueRecord] = {}
    todo = []
    for s in stat_ids:
        get_statistic(s)
        hit = cache.get(s, config) if cache is not None else None
        if hit is not None:
            log.info("cache hit for %s at n=%d (%d reps, seed %d)", s, config.n, config.replications, config.master_seed)
            out[s] = hit
        else:
            todo.append(s)
    if todo:
        null = simulate_null(todo, config.n, config.replications, config.master_seed, workers)
        for j, s in enumerate(todo):
            rec = CriticalValueRecord(
                statistic_id=s,
                n=config.n,
                alpha=config.alpha,
                value=empirical_quantile(null[:, j], 1 - config.alpha),
                replications=config.replications,
                master_seed=config.master_seed,
            )
            if cache is not None:
                cache.put(rec)
            out[s] = rec
    return {s: out[s] for s in stat_ids}


def mc_critical_value(
    statistic: str, config: McConfig, workers: int = 1, cache: Optional[CriticalValueCache] = None
) -> CriticalValueRecord:
    """Empirical (1 - alpha) quantile of ``statistic`` under the Benford law."""
    return mc_critical_values([statistic], config, workers, cache)[statistic]


def mc_test(
    test_id: str, statistic: float, n: int, alpha: float, config: Optional[McConfig], workers: int = 1
) -> TestResult:
    """Simulation-calibrated decision and p-value ``(1 + #{T* >= t}) / (R + 1)``."""
    if config is None:
        raise ConfigurationError(f"{test_id}: Monte Carlo calibration needs an McConfig")
    if config.n != n:
        raise ConfigurationError(f"McConfig is for n={config.n} but the sample has n={n}")
    null = simulate_null([test_id], n, config.replications, config.master_seed, workers)[:, 0]
    crit = empirical_quantile(null, 1 - alpha)
    return TestResult(
        test_id=test_id,
        statistic=float(statistic),
        critical_value=crit,
        reject=bool(statistic > crit),
        calibration="monte-carlo",
        alpha=alpha,
        p_value=(1 + int(np.sum(null >= statistic))) / (config.replications + 1),
        replications=config.replications,
        seed=config.master_seed,
    )


def rejection_rates(
    criticals: dict[str, CriticalValueRecord],
    pmf: Pmf9 | np.ndarray,
    config: McConfig,
    stream: Sequence[int] = (POWER_STREAM,),
    workers: int = 1,
) -> dict[str, float]:
    """Share of samples from ``pmf`` rejected by each test, on common samples."""
    for s, rec in criticals.items():
        if rec.statistic_id != s:
            raise ConfigurationError(f"critical value for {rec.statistic_id} passed as {s}")
        if rec.n != config.n:
            raise ConfigurationError(f"critical value for {s} is for n={rec.n}, config has n={config.n}")
    ids = list(criticals)
    counts = simulate_counts(pmf, config.n, config.replications, config.master_seed, stream, workers)
    values = evaluate(ids, counts)
    return {s: float(np.mean(values[:, j] > criticals[s].value)) for j, s in enumerate(ids)}


def mc_power(
    statistic: str,
    alt: AlternativeSpec | Pmf9,
    config: McConfig,
    critical: CriticalValueRecord,
    workers: int = 1,
    stream: Sequence[int] = (POWER_STREAM,),
) -> float:
    """Fraction of ``config.replications`` samples from ``alt`` whose statistic exceeds the critical value."""
    if critical.statistic_id != statistic:
        raise ConfigurationError(f"critical value is for {critical.statistic_id}, not {statistic}")
    pmf = alternative_pmf(alt) if isinstance(alt, AlternativeSpec) else alt
    return rejection_rates({statistic: critical}, pmf, config, stream, workers)[statistic]


def power_curve(
    stat_ids: Sequence[str],
    family: str,
    betas: Sequence[float],
    config: McConfig,
    null_replications: int = DESK_NULL_REPLICATIONS,
    workers: int = 1,
    cache: Optional[CriticalValueCache] = None,
) -> list[PowerCurve]:
    """Power of each statistic along a parameter grid of one family.

    Critical values come from ``null_replications`` null samples and are
    shared by every grid point.  Grid point ``i`` uses stream
    ``(1, family_index, i)``; all tests see the same samples.
    """
    specs = [AlternativeSpec(family, b) for b in betas]
    null_cfg = McConfig(null_replications, config.master_seed, config.n, config.alpha)
    criticals = mc_critical_values(stat_ids, null_cfg, workers, cache)
    curves = {s: PowerCurve(family, s, config.n) for s in stat_ids}
    fam = FAMILIES.index(family)
    for i, spec in enumerate(specs):
        rates = rejection_rates(criticals, alternative_pmf(spec), config, (POWER_STREAM, fam, i), workers)
        for s in stat_ids:
            curves[s].points.append((spec.beta, rates[s], config.replications))
    return [curves[s] for s in stat_ids]


def binomial_se(p: float, reps: int) -> float:
    return math.sqrt(p * (1 - p) / reps)
