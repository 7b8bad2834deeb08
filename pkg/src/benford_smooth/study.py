"""Six-panel power study: one alternative family per panel, five tests.

Sample sizes per family are fixed by the study design; the parameter grids
are ours, chosen so every curve runs from the null point up to high power.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .alternatives import NULL_PARAMETER
from .montecarlo import (
    DEFAULT_BATTERY,
    DESK_NULL_REPLICATIONS,
    DESK_POWER_REPLICATIONS,
    CriticalValueCache,
    McConfig,
    PowerCurve,
    power_curve,
)

CSV_HEADER = ("family", "test", "n", "beta", "power", "replications", "seed")


@dataclass(frozen=True)
class Panel:
    label: str
    family: str
    n: int
    grid: tuple[float, ...]

    @property
    def filename(self) -> str:
        return f"panel_{self.label}_{self.family}.csv"


PANELS = (
    Panel("a", "rodriguez", 250, (-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0)),
    Panel("b", "pietronero", 50, (0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0)),
    Panel("c", "hurlimann", 750, (0.7, 0.8, 0.9, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6)),
    Panel("d", "mixture", 500, (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35)),
    Panel("e", "contaminated1", 500, (0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06)),
    Panel("f", "contaminated2", 500, (-2.0, 0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0)),
)


def is_null_point(family: str, beta: float) -> bool:
    if family == "hurlimann":
        return beta in (1.0, 2.0)
    return beta == NULL_PARAMETER[family]


def curves_to_csv(curves: Sequence[PowerCurve], seed: int) -> str:
    """Long-format CSV, one row per (test, beta); dot decimal separator."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for c in curves:
        for beta, power, reps in c.points:
            w.writerow([c.family, c.test_id, c.n, repr(float(beta)), repr(float(power)), reps, seed])
    return buf.getvalue()


def run_panel(
    panel: Panel,
    replications: int = DESK_POWER_REPLICATIONS,
    null_replications: int = DESK_NULL_REPLICATIONS,
    seed: int = 0,
    tests: Sequence[str] = DEFAULT_BATTERY,
    alpha: float = 0.05,
    workers: int = 1,
    cache: Optional[CriticalValueCache] = None,
) -> list[PowerCurve]:
    cfg = McConfig(replications, seed, panel.n, alpha)
    return power_curve(tests, panel.family, panel.grid, cfg, null_replications, workers, cache)


def run_figure1(
    output_dir: str | Path,
    replications: int = DESK_POWER_REPLICATIONS,
    null_replications: int = DESK_NULL_REPLICATIONS,
    seed: int = 0,
    alpha: float = 0.05,
    workers: int = 1,
    cache: Optional[CriticalValueCache] = None,
) -> dict[str, list[PowerCurve]]:
    """Run every panel and write one CSV per panel plus ``manifest.json``."""
    cache = cache if cache is not None else CriticalValueCache()
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = {}
    manifest = {
        "schema": "benford-smooth/figure1",
        "schema_version": 1,
        "seed": seed,
        "alpha": alpha,
        "power_replications": replications,
        "null_replications": null_replications,
        "tests": list(DEFAULT_BATTERY),
        "panels": [],
    }
    for panel in PANELS:
        curves = run_panel(panel, replications, null_replications, seed, DEFAULT_BATTERY, alpha, workers, cache)
        (out / panel.filename).write_text(curves_to_csv(curves, seed), encoding="utf-8")
        results[panel.label] = curves
        manifest["panels"].append(
            {"panel": panel.label, "family": panel.family, "n": panel.n, "grid": list(panel.grid), "file": panel.filename}
        )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return results
