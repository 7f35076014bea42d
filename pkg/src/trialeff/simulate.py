"""Monte Carlo harness: simulate two-arm trials and measure interval coverage.

Each replicate draws true case counts per arm, pushes them through the
diagnostic test at the individual level (a thinning of true cases plus
false positives among non-cases), analyses the observed counts as raw
data, and records whether each requested interval method covered the
true efficacy.

Replicates use independent substreams derived from (seed, replicate
index), so the report is bit-identical for a given seed and config no
matter how many workers run it.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classical import fisher_rr_interval, wald_efficacy_interval
from .errors import DegenerateDataError, DomainError, EstimationError
from .posterior import credible_interval, cramer_rao_interval, posterior
from .trial import PERFECT_TEST, DiagnosticProfile, TrialCounts

KNOWN_METHODS = ("conditional", "wald", "cramer-rao", "fisher-rr")


@dataclass(frozen=True)
class SimulationConfig:
    """Settings for one coverage study.

    ``prevalence`` is the true control-arm attack rate; the vaccinated
    arm gets (1 - ve) times that.  ``diagnostic`` shapes the data
    generation only; analysis always runs on the observed counts as if
    the test were perfect.
    """

    n_per_arm: int
    prevalence: float
    ve: float
    diagnostic: DiagnosticProfile = PERFECT_TEST
    replicates: int = 1000
    seed: int = 0
    methods: tuple[str, ...] = ("conditional", "wald")
    level: float = 0.95
    grid_size: int = 2001
    workers: int = 1

    def __post_init__(self):
        if self.n_per_arm < 1:
            raise DomainError(f"n_per_arm must be at least 1, got {self.n_per_arm}")
        if not 0.0 < self.prevalence <= 1.0:
            raise DomainError(f"prevalence must lie in (0, 1], got {self.prevalence}")
        if not 0.0 <= self.ve <= 1.0:
            raise DomainError(f"true efficacy must lie in [0, 1], got {self.ve}")
        if self.replicates < 1:
            raise DomainError(f"replicates must be at least 1, got {self.replicates}")
        if not 0.0 < self.level < 1.0:
            raise DomainError(f"level must lie in (0, 1), got {self.level}")
        unknown = set(self.methods) - set(KNOWN_METHODS)
        if unknown:
            raise DomainError(f"unknown interval methods: {sorted(unknown)}")
        if self.workers < 1:
            raise DomainError(f"workers must be at least 1, got {self.workers}")
        object.__setattr__(self, "methods", tuple(self.methods))

    @property
    def prevalence_vaccinated(self) -> float:
        return (1.0 - self.ve) * self.prevalence

    def as_dict(self) -> dict:
        return {
            "n_per_arm": self.n_per_arm,
            "prevalence": self.prevalence,
            "ve": self.ve,
            "sensitivity": self.diagnostic.sensitivity,
            "specificity": self.diagnostic.specificity,
            "replicates": self.replicates,
            "seed": self.seed,
            "methods": list(self.methods),
            "level": self.level,
            "grid_size": self.grid_size,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class MethodResult:
    """Coverage tally for one interval method."""

    coverage: float
    mean_width: float
    evaluated: int
    failures: int

    def as_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "mean_width": self.mean_width,
            "evaluated": self.evaluated,
            "failures": self.failures,
        }


@dataclass(frozen=True)
class ReplicateRecord:
    """One replicate/method outcome; bounds are None when undefined."""

    replicate: int
    t_v: int
    t_c: int
    method: str
    lower: float | None
    upper: float | None
    covered: bool | None


@dataclass(frozen=True)
class CoverageReport:
    """Per-method empirical coverage for one simulation config.

    ``records`` carries the per-replicate detail when the study was run
    with ``keep_replicates=True``; it is not part of the JSON report.
    """

    config: SimulationConfig
    replicates: int
    methods: dict[str, MethodResult] = field(default_factory=dict)
    records: tuple[ReplicateRecord, ...] | None = None

    def as_dict(self) -> dict:
        return {
            "config": self.config.as_dict(),
            "replicates": self.replicates,
            "methods": {name: res.as_dict() for name, res in self.methods.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def replicates_to_csv(report: CoverageReport) -> str:
    """CSV dump of per-replicate outcomes; needs keep_replicates=True."""
    if report.records is None:
        raise DomainError("coverage study was run without keep_replicates")
    lines = ["replicate,t_v,t_c,method,lower,upper,covered"]
    for rec in report.records:
        if rec.covered is None:
            lines.append(f"{rec.replicate},{rec.t_v},{rec.t_c},{rec.method},,,")
        else:
            lines.append(
                f"{rec.replicate},{rec.t_v},{rec.t_c},{rec.method},"
                f"{rec.lower!r},{rec.upper!r},{int(rec.covered)}"
            )
    return "\n".join(lines) + "\n"


def _observe_arm(rng: np.random.Generator, n: int, true_rate: float, d: DiagnosticProfile) -> int:
    """True cases thinned by sensitivity plus false positives among non-cases."""
    true_cases = int(rng.binomial(n, true_rate))
    detected = int(rng.binomial(true_cases, d.sensitivity)) if true_cases else 0
    false_pos = (
        int(rng.binomial(n - true_cases, d.false_positive_rate))
        if d.false_positive_rate > 0.0 and n > true_cases
        else 0
    )
    return detected + false_pos


def simulate_trial(config: SimulationConfig, rng: np.random.Generator) -> TrialCounts:
    """Draw one trial's observed counts under the configured truth."""
    n = config.n_per_arm
    t_v = _observe_arm(rng, n, config.prevalence_vaccinated, config.diagnostic)
    t_c = _observe_arm(rng, n, config.prevalence, config.diagnostic)
    return TrialCounts(n_v=n, t_v=t_v, n_c=n, t_c=t_c)


def _interval_bounds(method: str, counts: TrialCounts, level: float, grid_size: int) -> tuple[float, float]:
    if method == "conditional":
        est = credible_interval(posterior(counts, grid_size=grid_size), level)
    elif method == "wald":
        est = wald_efficacy_interval(counts, level)
    elif method == "cramer-rao":
        est = cramer_rao_interval(counts, level=level)
    elif method == "fisher-rr":
        rr_est = fisher_rr_interval(counts, level)
        return rr_est.efficacy_lower, rr_est.efficacy_upper
    else:
        raise DomainError(f"unknown interval method {method!r}")
    return est.lower, est.upper


def _run_replicate(
    config: SimulationConfig, index: int
) -> tuple[TrialCounts, dict[str, tuple[bool, float, float] | None]]:
    rng = np.random.default_rng((config.seed, index))
    counts = simulate_trial(config, rng)
    out: dict[str, tuple[bool, float, float] | None] = {}
    for method in config.methods:
        try:
            lower, upper = _interval_bounds(method, counts, config.level, config.grid_size)
        except (DegenerateDataError, DomainError, EstimationError):
            out[method] = None
            continue
        covered = lower <= config.ve <= upper
        out[method] = (covered, lower, upper)
    return counts, out


def coverage_study(config: SimulationConfig, keep_replicates: bool = False) -> CoverageReport:
    """Run the configured replicates and tally per-method coverage.

    Replicates where a method is undefined (zero cells, degenerate
    draws) are counted as failures and excluded from that method's
    coverage denominator.
    """
    indices = range(config.replicates)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda i: _run_replicate(config, i), indices))
    else:
        results = [_run_replicate(config, i) for i in indices]

    methods: dict[str, MethodResult] = {}
    for method in config.methods:
        covered = 0
        width_total = 0.0
        evaluated = 0
        failures = 0
        for _, rep in results:
            outcome = rep[method]
            if outcome is None:
                failures += 1
                continue
            evaluated += 1
            covered += outcome[0]
            width_total += outcome[2] - outcome[1]
        methods[method] = MethodResult(
            coverage=covered / evaluated if evaluated else float("nan"),
            mean_width=width_total / evaluated if evaluated else float("nan"),
            evaluated=evaluated,
            failures=failures,
        )
    records: tuple[ReplicateRecord, ...] | None = None
    if keep_replicates:
        rows = []
        for index, (counts, rep) in enumerate(results):
            for method in config.methods:
                outcome = rep[method]
                if outcome is None:
                    rows.append(
                        ReplicateRecord(index, counts.t_v, counts.t_c, method, None, None, None)
                    )
                else:
                    rows.append(
                        ReplicateRecord(
                            index, counts.t_v, counts.t_c, method,
                            outcome[1], outcome[2], outcome[0],
                        )
                    )
        records = tuple(rows)
    return CoverageReport(
        config=config,
        replicates=config.replicates,
        methods=methods,
        records=records,
    )
