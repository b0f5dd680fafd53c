"""
Seeded Monte Carlo study of the overlap estimators.

Every replicate draws from its own generator, derived from the master seed,
the case id, the size tuple and the replicate index.  Replicates can therefore
run in any order, on any number of threads, and the report is bit-identical.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import DistributionSpec, Sample, Support
from .errors import DegenerateSampleError, ParameterError
from .kde import KdeModel, fit
from .overlap import Diagnostics, EstimatorResult, IndexSubset, estimate_all, exact_delta

__all__ = [
    "StudyCase",
    "StudyConfig",
    "ReportRow",
    "StudyReport",
    "relative_bias",
    "relative_rmse",
    "replicate_stream",
    "run_replicate",
    "run_study",
    "REFERENCE_MISMATCH_WARN",
    "MAX_DISCARD_FRACTION",
]

log = logging.getLogger(__name__)

REFERENCE_MISMATCH_WARN = 0.005
MAX_DISCARD_FRACTION = 0.01
_CHUNK = 50  # replicates per worker task


@dataclass(frozen=True)
class StudyCase:
    """One row of the study design.

    ``reference_delta`` is an externally supplied exact value, kept only for
    comparison; metrics always use the quadrature value.  ``supports`` gives the
    declared support of each population (defaults to each family's support).
    """

    case_id: str
    specs: tuple[DistributionSpec, ...]
    reference_delta: float | None = None
    supports: tuple[Support, ...] | None = None

    def __post_init__(self):
        specs = tuple(self.specs)
        if len(specs) < 2:
            raise ParameterError(f"case {self.case_id}: need at least 2 distributions")
        supports = self.supports
        if supports is None:
            supports = tuple(s.support for s in specs)
        supports = tuple(Support(s) for s in supports)
        if len(supports) != len(specs):
            raise ParameterError(f"case {self.case_id}: one support per distribution required")
        for spec, sup in zip(specs, supports):
            if sup is Support.NON_NEGATIVE and spec.support is not Support.NON_NEGATIVE:
                raise ParameterError(
                    f"case {self.case_id}: {spec.describe()} cannot be declared non-negative"
                )
        object.__setattr__(self, "case_id", str(self.case_id))
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "supports", supports)

    @property
    def k(self) -> int:
        return len(self.specs)


@dataclass(frozen=True)
class StudyConfig:
    cases: tuple[StudyCase, ...]
    size_tuples: tuple[tuple[int, ...], ...]
    replicates: int
    seed: int
    estimators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "cases", tuple(self.cases))
        object.__setattr__(self, "size_tuples", tuple(tuple(int(n) for n in t) for t in self.size_tuples))
        object.__setattr__(self, "estimators", tuple(tuple(int(i) for i in e) for e in self.estimators))
        if self.replicates < 1:
            raise ParameterError(f"replicates must be >= 1, got {self.replicates}")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        ids = [c.case_id for c in self.cases]
        if len(set(ids)) != len(ids):
            raise ParameterError("case ids must be unique")
        for sizes in self.size_tuples:
            if any(n < 2 for n in sizes):
                raise ParameterError(f"all sample sizes must be >= 2, got {sizes}")
        for case in self.cases:
            for sizes in self.size_tuples:
                if len(sizes) != case.k:
                    raise ParameterError(
                        f"case {case.case_id} has k={case.k} but size tuple {sizes} has {len(sizes)}"
                    )
            for est in self.estimators:
                IndexSubset.of(case.k, *est)


@dataclass(frozen=True)
class ReportRow:
    case_id: str
    sizes: tuple[int, ...]
    subset: IndexSubset
    average: float
    rb: float
    rmse: float
    replicates_used: int


@dataclass
class StudyReport:
    rows: list[ReportRow]
    exact: dict[str, float]
    reference: dict[str, float | None]
    discarded: dict[tuple[str, tuple[int, ...]], int] = field(default_factory=dict)
    underflow: int = 0
    warnings: list[str] = field(default_factory=list)
    quality_errors: list[str] = field(default_factory=list)

    def row(self, case_id: str, sizes: Sequence[int], subset: Sequence[int]) -> ReportRow:
        sizes, subset = tuple(sizes), tuple(subset)
        for r in self.rows:
            if r.case_id == case_id and r.sizes == sizes and r.subset.indices == subset:
                return r
        raise KeyError((case_id, sizes, subset))


def _check_metric_args(estimates, exact: float) -> np.ndarray:
    if not exact > 0:
        raise ParameterError(f"exact value must be > 0, got {exact}")
    est = np.asarray(estimates, dtype=float).ravel()
    if est.size == 0:
        raise ParameterError("need at least one estimate")
    return est


def relative_bias(estimates, exact: float) -> float:
    """``(mean(estimates) - exact) / exact``."""
    est = _check_metric_args(estimates, exact)
    return (math.fsum(est) / est.size - exact) / exact


def relative_rmse(estimates, exact: float) -> float:
    """``sqrt(mean((estimates - exact)^2)) / exact``."""
    est = _check_metric_args(estimates, exact)
    return math.sqrt(math.fsum((est - exact) ** 2) / est.size) / exact


def _label_key(label: str) -> list[int]:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return [int.from_bytes(digest[:4], "little"), int.from_bytes(digest[4:], "little")]


def replicate_stream(
    seed: int, case_id: str, sizes: Sequence[int], replicate: int
) -> np.random.Generator:
    """Independent generator keyed by (seed, case id, sizes, replicate index)."""
    key = [*_label_key(case_id), len(sizes), *map(int, sizes), int(replicate)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=key)))


def run_replicate(
    case: StudyCase,
    sizes: Sequence[int],
    stream: np.random.Generator,
    subsets: Sequence[IndexSubset],
    diagnostics: Diagnostics | None = None,
) -> list[EstimatorResult]:
    """Draw one sample per population, fit the KDEs and estimate every subset."""
    if len(sizes) != case.k:
        raise ParameterError(f"case {case.case_id} needs {case.k} sizes, got {len(sizes)}")
    samples = [
        Sample(spec.sample(n, stream).values, support)
        for spec, n, support in zip(case.specs, sizes, case.supports)
    ]
    models: list[KdeModel] = [fit(s) for s in samples]
    return estimate_all(models, samples, subsets, diagnostics)


def _run_chunk(case, sizes, subsets, seed, start, stop):
    values = np.full((stop - start, len(subsets)), np.nan)
    diag = Diagnostics()
    for r in range(start, stop):
        stream = replicate_stream(seed, case.case_id, sizes, r)
        try:
            results = run_replicate(case, sizes, stream, subsets, diag)
        except DegenerateSampleError as exc:
            log.warning("case %s sizes %s replicate %d discarded: %s", case.case_id, sizes, r, exc)
            continue
        values[r - start] = [res.value for res in results]
    return values, diag.underflow


def resolve_threads(threads: int | None) -> int:
    if threads is None or threads <= 0:
        return os.cpu_count() or 1
    return threads


def run_study(config: StudyConfig, threads: int = 1) -> StudyReport:
    """Run every (case, size tuple) cell and aggregate Average, RB and RMSE.

    ``threads <= 0`` means one worker per CPU.  The worker count never affects
    the output.
    """
    exact: dict[str, float] = {}
    reference: dict[str, float | None] = {}
    warnings: list[str] = []
    for case in config.cases:
        exact[case.case_id] = exact_delta(case.specs).value
        reference[case.case_id] = case.reference_delta
        if case.reference_delta is not None:
            gap = abs(exact[case.case_id] - case.reference_delta)
            if gap > REFERENCE_MISMATCH_WARN:
                msg = (
                    f"case {case.case_id}: quadrature gives {exact[case.case_id]:.4f}, "
                    f"reference value is {case.reference_delta:.4f} (|diff| = {gap:.4f})"
                )
                log.warning(msg)
                warnings.append(msg)

    cells = [(case, sizes) for case in config.cases for sizes in config.size_tuples]
    cell_subsets = [[IndexSubset.of(case.k, *e) for e in config.estimators] for case, _ in cells]
    tasks = [
        (c, start, min(start + _CHUNK, config.replicates))
        for c in range(len(cells))
        for start in range(0, config.replicates, _CHUNK)
    ]

    def work(task):
        c, start, stop = task
        case, sizes = cells[c]
        return _run_chunk(case, sizes, cell_subsets[c], config.seed, start, stop)

    n_workers = resolve_threads(threads)
    if n_workers == 1:
        outputs = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            outputs = list(pool.map(work, tasks))

    per_cell: list[list[np.ndarray]] = [[] for _ in cells]
    underflow = 0
    for (c, _, _), (values, uf) in zip(tasks, outputs):
        per_cell[c].append(values)  # tasks are generated in replicate order
        underflow += uf

    report = StudyReport(rows=[], exact=exact, reference=reference, warnings=warnings)
    report.underflow = underflow
    for c, (case, sizes) in enumerate(cells):
        values = np.concatenate(per_cell[c])
        ok = ~np.isnan(values[:, 0])
        discarded = int((~ok).sum())
        report.discarded[(case.case_id, sizes)] = discarded
        if discarded > MAX_DISCARD_FRACTION * config.replicates:
            report.quality_errors.append(
                f"case {case.case_id} sizes {sizes}: {discarded} of {config.replicates} "
                "replicates discarded (degenerate samples)"
            )
        truth = exact[case.case_id]
        for j, subset in enumerate(cell_subsets[c]):
            est = values[ok, j]
            if est.size == 0:
                continue
            report.rows.append(
                ReportRow(
                    case_id=case.case_id,
                    sizes=sizes,
                    subset=subset,
                    average=math.fsum(est) / est.size,
                    rb=relative_bias(est, truth),
                    rmse=relative_rmse(est, truth),
                    replicates_used=int(est.size),
                )
            )
    return report
