"""Deterministic Monte Carlo studies of dual-record estimators.

The harness draws replicate tables from the behavioral model, applies a set
of estimators to each replicate, and aggregates sampling-distribution
summaries (mean, s.d. reported as s.e., RMSE against the generating size,
and 2.5/97.5 percentile interval). On top of the basic study it provides
three derived experiments:

    se_scaling_study    s.d. against population size on a log-log grid, with
                        an OLS growth exponent per estimator,
    coverage_bands      95% relative confidence band endpoints
                        (mean +/- 1.96 sd)/N across a size grid,
    robustness_sweep    relative mean and bands across a grid of behavioral
                        effect values for fixed capture-probability pairs.

Everything is deterministic given the seed: replicate r of population i
reads counter block r of the Philox stream keyed by (seed, purpose, i), so
results are bit-identical across reruns and across any worker count.
Replicates on which an estimator fails (e.g. x11 = 0 making the dual-system
estimate infinite) are excluded and counted; a cell losing more than 10% of
its replicates is flagged invalid.
"""

from __future__ import annotations

import json
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .estimators import EstimatorSpec, parse_estimator
from .randomness import (
    DEFAULT_SEED,
    PURPOSE_BANDS,
    PURPOSE_SCALING,
    PURPOSE_STUDY,
    PURPOSE_SWEEP,
    draw_tables,
    uniforms,
)
from .tables import (
    DualRecordTable,
    EstimationError,
    FeasibilityError,
    MtbParams,
    ValidationError,
    cell_probs_mtb,
    expected_distinct,
    p_from_marginals,
)

__all__ = [
    "PopulationSpec",
    "StudyConfig",
    "StudySummary",
    "Substream",
    "CSV_HEADER",
    "TABLE2_POPULATIONS",
    "SCALING_SITUATIONS",
    "SWEEP_SITUATIONS",
    "DEFAULT_PHI_GRID",
    "DEFAULT_N_GRID",
    "sample_table",
    "sample_tables",
    "run_study",
    "summaries_to_csv",
    "se_scaling_study",
    "coverage_bands",
    "robustness_sweep",
    "ScalingPoint",
    "ScalingResult",
    "BandPoint",
    "SweepPoint",
    "SweepResult",
]

CSV_HEADER = "population,estimator,mean,se,rmse,ci_low,ci_high,failures"


@dataclass(frozen=True)
class PopulationSpec:
    """Generating population for the behavioral model.

    The second-list marginal capture probability p.1 is the specification
    input; the first-capture probability p is derived from it, so an
    infeasible combination (derived p outside (0,1), or recapture
    probability phi*p >= 1) is rejected at construction.
    """

    label: str
    n: int
    p1_dot: float
    p_dot1: float
    phi: float

    def __post_init__(self) -> None:
        if not (isinstance(self.n, int) and self.n >= 1):
            raise ValidationError(f"population size must be a positive integer, got {self.n!r}")
        # Full feasibility check: raises FeasibilityError on a bad combination.
        self.params()

    def params(self) -> MtbParams:
        p = p_from_marginals(self.p1_dot, self.p_dot1, self.phi)
        return MtbParams(n=self.n, p1_dot=self.p1_dot, p=p, phi=self.phi)

    def cells(self) -> tuple[float, float, float, float]:
        return cell_probs_mtb(self.params()).as_tuple()

    def expected_distinct(self) -> float:
        return expected_distinct(self.params())

    def with_n(self, n: int, label: str | None = None) -> "PopulationSpec":
        return replace(self, n=n, label=self.label if label is None else label)

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "N": self.n,
            "p1": self.p1_dot,
            "p_dot1": self.p_dot1,
            "phi": self.phi,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PopulationSpec":
        try:
            return cls(
                label=str(data["label"]),
                n=int(data["N"]),
                p1_dot=float(data["p1"]),
                p_dot1=float(data["p_dot1"]),
                phi=float(data["phi"]),
            )
        except KeyError as exc:
            raise ValidationError(f"population entry missing key {exc}") from exc


TABLE2_POPULATIONS: tuple[PopulationSpec, ...] = (
    PopulationSpec("P1", 500, 0.50, 0.65, 1.25),
    PopulationSpec("P2", 500, 0.60, 0.70, 1.25),
    PopulationSpec("P3", 500, 0.80, 0.70, 1.25),
    PopulationSpec("P4", 500, 0.70, 0.55, 1.25),
    PopulationSpec("P5", 500, 0.50, 0.65, 0.80),
    PopulationSpec("P6", 500, 0.60, 0.70, 0.80),
    PopulationSpec("P7", 500, 0.80, 0.70, 0.80),
    PopulationSpec("P8", 500, 0.70, 0.55, 0.80),
)

# The four scaling situations are the Table-2 populations with the shared
# capture-probability pairs, taken at both behavioral-effect values.
SCALING_SITUATIONS: tuple[PopulationSpec, ...] = (
    replace(TABLE2_POPULATIONS[1], label="S1"),
    replace(TABLE2_POPULATIONS[3], label="S2"),
    replace(TABLE2_POPULATIONS[5], label="S3"),
    replace(TABLE2_POPULATIONS[7], label="S4"),
)

# Capture-probability pairs for the behavioral-effect sweep: the four
# distinct (p1., p.1) combinations appearing in the study populations.
SWEEP_SITUATIONS: tuple[tuple[str, float, float], ...] = (
    ("p50-65", 0.50, 0.65),
    ("p60-70", 0.60, 0.70),
    ("p80-70", 0.80, 0.70),
    ("p70-55", 0.70, 0.55),
)

DEFAULT_PHI_GRID: tuple[float, ...] = tuple(0.5 + 0.25 * i for i in range(11))
DEFAULT_N_GRID: tuple[int, ...] = tuple(range(100, 1001, 100))


@dataclass(frozen=True)
class StudyConfig:
    """Study description: populations x estimators at a replicate count.

    JSON form (exactly these keys):
        {"populations": [{"label", "N", "p1", "p_dot1", "phi"}, ...],
         "estimators": [str, ...], "replicates": int, "seed": int,
         "delta_mode": "candidate" | "oracle"}
    """

    populations: tuple[PopulationSpec, ...]
    estimators: tuple[str, ...]
    replicates: int
    seed: int
    delta_mode: str = "candidate"

    def __post_init__(self) -> None:
        object.__setattr__(self, "populations", tuple(self.populations))
        object.__setattr__(self, "estimators", tuple(self.estimators))
        if self.replicates < 2:
            raise ValidationError(f"replicates must be >= 2, got {self.replicates}")
        if self.delta_mode not in ("candidate", "oracle"):
            raise ValidationError(
                f"delta_mode must be 'candidate' or 'oracle', got {self.delta_mode!r}"
            )
        if not self.populations:
            raise ValidationError("study needs at least one population")
        if not self.estimators:
            raise ValidationError("study needs at least one estimator")
        for descriptor in self.estimators:
            parse_estimator(descriptor)

    def to_json(self) -> str:
        return json.dumps(
            {
                "populations": [p.to_json_dict() for p in self.populations],
                "estimators": list(self.estimators),
                "replicates": self.replicates,
                "seed": self.seed,
                "delta_mode": self.delta_mode,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "StudyConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config is not valid JSON: {exc}") from exc
        try:
            return cls(
                populations=tuple(
                    PopulationSpec.from_json_dict(p) for p in data["populations"]
                ),
                estimators=tuple(str(e) for e in data["estimators"]),
                replicates=int(data["replicates"]),
                seed=int(data["seed"]),
                delta_mode=str(data.get("delta_mode", "candidate")),
            )
        except KeyError as exc:
            raise ValidationError(f"config missing key {exc}") from exc


@dataclass(frozen=True)
class StudySummary:
    """Sampling-distribution summary for one population x estimator cell.

    ``se`` is the sample standard deviation across replicate estimates (the
    convention in simulation reporting); ``rmse`` is against the generating
    size; the interval is the 2.5/97.5 percentile of the replicate
    estimates. ``invalid`` marks cells that lost more than 10% of their
    replicates to estimator failures. ``delta_used`` is the mean adjustment
    coefficient across successful replicates (None for unadjusted methods).
    """

    population: str
    estimator: str
    mean: float
    se: float
    rmse: float
    ci_low: float
    ci_high: float
    replicate_count: int
    failures: int
    invalid: bool
    true_n: int
    delta_used: float | None = None


class Substream(NamedTuple):
    """Address of one replicate's randomness: (seed, purpose, unit, replicate)."""

    seed: int
    purpose: int = PURPOSE_STUDY
    unit: int = 0
    replicate: int = 0


def sample_tables(
    spec: PopulationSpec,
    seed: int,
    purpose: int,
    unit: int,
    count: int,
    start: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Draw ``count`` replicate tables for blocks [start, start + count)."""
    u = uniforms(seed, purpose, unit, count, start)
    return draw_tables(spec.n, spec.cells(), u)


def sample_table(spec: PopulationSpec, stream: Substream) -> DualRecordTable:
    """Draw the single replicate table addressed by ``stream``.

    Identical output for identical stream addresses regardless of what else
    has been sampled: equals row ``stream.replicate`` of a sequential batch.
    """
    x11, x10, x01 = sample_tables(
        spec, stream.seed, stream.purpose, stream.unit, 1, stream.replicate
    )
    return DualRecordTable(int(x11[0]), int(x10[0]), int(x01[0]))


_FAILED = object()


def _apply_estimator(
    est: EstimatorSpec,
    tables: list[DualRecordTable | None],
    mode: str,
    true_n: int,
    memo: dict,
    workers: int,
) -> list:
    """Estimate every table; returns (n_hat, delta_used) rows or _FAILED.

    ``None`` entries (replicates in which no individual was captured) fail
    unconditionally. Results are memoized by (estimator, mode, table) —
    replicate tables repeat constantly at study scales — and chunked across
    workers in contiguous replicate ranges, so the merged output is
    independent of the worker count.
    """
    memo_true_n = true_n if mode == "oracle" else None

    def run_slice(chunk: list[DualRecordTable | None]) -> list:
        rows = []
        for t in chunk:
            if t is None:
                rows.append(_FAILED)
                continue
            key = (est.label, mode, memo_true_n, t.x11, t.x10, t.x01)
            hit = memo.get(key)
            if hit is None:
                try:
                    rep = est.estimate(t, delta_mode=mode, true_n=true_n)
                    hit = (rep.n_hat, rep.delta_used)
                except EstimationError:
                    hit = _FAILED
                memo[key] = hit
            rows.append(hit)
        return rows

    if workers <= 1 or len(tables) < 2 * workers:
        return run_slice(tables)
    bounds = np.linspace(0, len(tables), workers + 1).astype(int)
    chunks = [tables[bounds[i]:bounds[i + 1]] for i in range(workers)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run_slice, chunks))
    return [row for part in parts for row in part]


def run_study(
    config: StudyConfig,
    *,
    workers: int = 1,
    purpose: int = PURPOSE_STUDY,
) -> list[StudySummary]:
    """Run the configured study; one summary per population x estimator.

    Summaries are emitted in population-major, estimator-minor order.
    Deterministic given (config.seed, purpose): worker count only changes
    how replicate chunks are scheduled, never any value.
    """
    specs = [parse_estimator(e) for e in config.estimators]
    memo: dict = {}
    out: list[StudySummary] = []
    for pi, pop in enumerate(config.populations):
        x11, x10, x01 = sample_tables(pop, config.seed, purpose, pi, config.replicates)
        x0 = x11 + x10 + x01
        tables = [
            DualRecordTable(int(x11[i]), int(x10[i]), int(x01[i])) if x0[i] else None
            for i in range(config.replicates)
        ]
        for est in specs:
            mode = "oracle" if (est.oracle or config.delta_mode == "oracle") else "candidate"
            rows = _apply_estimator(est, tables, mode, pop.n, memo, workers)
            estimates = np.array([r[0] for r in rows if r is not _FAILED])
            deltas = [r[1] for r in rows if r is not _FAILED and r[1] is not None]
            failures = sum(1 for r in rows if r is _FAILED)
            if len(estimates) < 2:
                out.append(
                    StudySummary(
                        population=pop.label,
                        estimator=est.label,
                        mean=math.nan,
                        se=math.nan,
                        rmse=math.nan,
                        ci_low=math.nan,
                        ci_high=math.nan,
                        replicate_count=len(estimates),
                        failures=failures,
                        invalid=True,
                        true_n=pop.n,
                    )
                )
                continue
            ci_low, ci_high = np.percentile(estimates, [2.5, 97.5])
            out.append(
                StudySummary(
                    population=pop.label,
                    estimator=est.label,
                    mean=float(np.mean(estimates)),
                    se=float(np.std(estimates, ddof=1)),
                    rmse=float(np.sqrt(np.mean((estimates - pop.n) ** 2))),
                    ci_low=float(ci_low),
                    ci_high=float(ci_high),
                    replicate_count=len(estimates),
                    failures=failures,
                    invalid=failures > 0.1 * config.replicates,
                    true_n=pop.n,
                    # Exact rational mean: a constant adjustment averages to
                    # itself with no accumulation error in the reports.
                    delta_used=float(statistics.mean(deltas)) if deltas else None,
                )
            )
    return out


def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return repr(float(value))


def summaries_to_csv(
    summaries: list[StudySummary], *, include_delta: bool = False
) -> str:
    """Render summaries as CSV text with the fixed eight-column header.

    With ``include_delta`` a ninth ``delta_used`` column is appended,
    populated only on rows from adjusted-profile estimators.
    """
    header = CSV_HEADER + (",delta_used" if include_delta else "")
    lines = [header]
    for s in summaries:
        row = (
            f"{s.population},{s.estimator},{_fmt(s.mean)},{_fmt(s.se)},{_fmt(s.rmse)},"
            f"{_fmt(s.ci_low)},{_fmt(s.ci_high)},{s.failures}"
        )
        if include_delta:
            row += f",{_fmt(s.delta_used)}"
        lines.append(row)
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ScalingPoint:
    """Per-(situation, estimator, N) sampling s.d. with its study mean."""

    situation: str
    estimator: str
    n: int
    mean: float
    sd: float


@dataclass(frozen=True)
class ScalingResult:
    """Scaling-study output: grid points plus fitted log-log growth slopes."""

    points: tuple[ScalingPoint, ...]
    slopes: tuple[tuple[str, str, float], ...]

    def slope(self, situation: str, estimator: str) -> float:
        for sit, est, value in self.slopes:
            if sit == situation and est == estimator:
                return value
        raise KeyError((situation, estimator))

    def point(self, situation: str, estimator: str, n: int) -> ScalingPoint:
        for p in self.points:
            if p.situation == situation and p.estimator == estimator and p.n == n:
                return p
        raise KeyError((situation, estimator, n))


def _flat_grid_study(
    situations,
    n_grid,
    replicates: int,
    seed: int,
    estimators,
    delta_mode: str,
    workers: int,
    purpose: int,
) -> tuple[list[StudySummary], list[tuple[str, int]]]:
    """Run one study over the flattened (situation, N) grid.

    Flattening gives every grid point a distinct stream unit; the metadata
    list maps summary blocks back to (situation label, N).
    """
    populations = []
    meta = []
    for spec in situations:
        for n in n_grid:
            populations.append(spec.with_n(int(n), label=f"{spec.label}|N={int(n)}"))
            meta.append((spec.label, int(n)))
    config = StudyConfig(
        populations=tuple(populations),
        estimators=tuple(estimators),
        replicates=replicates,
        seed=seed,
        delta_mode=delta_mode,
    )
    return run_study(config, workers=workers, purpose=purpose), meta


def se_scaling_study(
    situations=SCALING_SITUATIONS,
    n_grid=DEFAULT_N_GRID,
    replicates: int = 200,
    seed: int = DEFAULT_SEED,
    estimators=("dse", "adpl-mtb:scaled:1.25"),
    *,
    delta_mode: str = "candidate",
    workers: int = 1,
) -> ScalingResult:
    """Sampling s.d. versus population size, with log-log growth exponents.

    For each situation and estimator the replicate s.d. is computed at every
    N in the grid and the OLS slope of ln(sd) on ln(N) is reported: 0.5
    corresponds to square-root growth of the estimator's spread.
    """
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValidationError("scaling N grid must be strictly increasing")
    summaries, meta = _flat_grid_study(
        situations, n_grid, replicates, seed, estimators,
        delta_mode, workers, PURPOSE_SCALING,
    )
    n_est = len(estimators)
    points = []
    for i, s in enumerate(summaries):
        sit_label, n = meta[i // n_est]
        points.append(ScalingPoint(sit_label, s.estimator, n, s.mean, s.se))
    est_labels = [parse_estimator(e).label for e in estimators]
    slopes = []
    for spec in situations:
        for est_label in est_labels:
            sub = [
                p for p in points
                if p.situation == spec.label and p.estimator == est_label and p.sd > 0
            ]
            xs = np.log([p.n for p in sub])
            ys = np.log([p.sd for p in sub])
            slope = float(np.polyfit(xs, ys, 1)[0])
            slopes.append((spec.label, est_label, slope))
    return ScalingResult(points=tuple(points), slopes=tuple(slopes))


@dataclass(frozen=True)
class BandPoint:
    """95% relative confidence band endpoints at one (population, estimator, N).

    rel_lcl/rel_ucl are (mean -/+ 1.96 sd)/N; their difference is
    3.92 sd / N by construction.
    """

    population: str
    estimator: str
    n: int
    mean: float
    sd: float
    rel_lcl: float
    rel_ucl: float


def coverage_bands(
    populations=TABLE2_POPULATIONS,
    n_grid=DEFAULT_N_GRID,
    replicates: int = 200,
    seed: int = DEFAULT_SEED,
    estimators=("dse", "adpl-mtb:scaled:1.25"),
    *,
    delta_mode: str = "candidate",
    workers: int = 1,
) -> list[BandPoint]:
    """Relative confidence bands across a size grid.

    Uses the replicate mean as the point estimate and the replicate s.d. as
    its s.e.; endpoints are scaled by the generating N so bands for
    different sizes share an axis and a band containing 1 brackets the truth.
    """
    summaries, meta = _flat_grid_study(
        populations, n_grid, replicates, seed, estimators,
        delta_mode, workers, PURPOSE_BANDS,
    )
    n_est = len(estimators)
    out = []
    for i, s in enumerate(summaries):
        pop_label, n = meta[i // n_est]
        half = 1.96 * s.se
        out.append(
            BandPoint(
                population=pop_label,
                estimator=s.estimator,
                n=n,
                mean=s.mean,
                sd=s.se,
                rel_lcl=(s.mean - half) / n,
                rel_ucl=(s.mean + half) / n,
            )
        )
    return out


@dataclass(frozen=True)
class SweepPoint:
    """Study summary at one (situation, behavioral effect, estimator) point."""

    situation: str
    phi: float
    estimator: str
    rel_mean: float
    rel_lcl: float
    rel_ucl: float
    mean: float
    sd: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    skipped: tuple[tuple[str, float, str], ...]


def robustness_sweep(
    situations=SWEEP_SITUATIONS,
    phi_grid=DEFAULT_PHI_GRID,
    n: int = 500,
    replicates: int = 200,
    seed: int = DEFAULT_SEED,
    estimators=("dse", "adpl-mtb:scaled:1.25"),
    *,
    delta_mode: str = "candidate",
    workers: int = 1,
) -> SweepResult:
    """Estimator behavior across a grid of behavioral-effect values.

    Situations are (label, p1., p.1) pairs held fixed while the behavioral
    effect varies. Grid points whose derived first-capture probability is
    infeasible are skipped and reported in ``skipped`` rather than failing
    the sweep.
    """
    populations = []
    meta = []
    skipped = []
    for label, p1_dot, p_dot1 in situations:
        for phi in phi_grid:
            try:
                populations.append(
                    PopulationSpec(f"{label}|phi={phi:g}", int(n), p1_dot, p_dot1, float(phi))
                )
                meta.append((label, float(phi)))
            except FeasibilityError as exc:
                skipped.append((label, float(phi), str(exc)))
    config = StudyConfig(
        populations=tuple(populations),
        estimators=tuple(estimators),
        replicates=replicates,
        seed=seed,
        delta_mode=delta_mode,
    )
    summaries = run_study(config, workers=workers, purpose=PURPOSE_SWEEP)
    n_est = len(estimators)
    points = []
    for i, s in enumerate(summaries):
        sit_label, phi = meta[i // n_est]
        half = 1.96 * s.se
        points.append(
            SweepPoint(
                situation=sit_label,
                phi=phi,
                estimator=s.estimator,
                rel_mean=s.mean / n,
                rel_lcl=(s.mean - half) / n,
                rel_ucl=(s.mean + half) / n,
                mean=s.mean,
                sd=s.se,
            )
        )
    return SweepResult(points=tuple(points), skipped=tuple(skipped))
