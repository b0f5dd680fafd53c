"""
Generalized Weitzman overlap coefficient for k densities.

The coefficient is the area under the pointwise minimum of the densities,

    delta_k = integral of min{f_1(x), ..., f_k(x)} dx.

Because ``delta_k = E[min_m f_m(X_i) / f_i(X_i)]`` for ``X_i ~ f_i`` and any
``i``, each sample yields its own moment estimator once the densities are
replaced by kernel estimates:

    delta_hat(i) = 1/n_i * sum_j  min_m fhat_m(X_ij) / fhat_i(X_ij).

Averages of these singletons over an index subset ``S`` give ``delta_hat(S)``;
the full subset is the averaged estimator. Indices are 1-based throughout to
match the ``delta_hat(1, 2)`` labels used in reports.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .distributions import DistributionSpec, Sample
from .errors import IntegrationError, UsageError
from .kde import KdeModel
from .quadrature import integrate

__all__ = [
    "IndexSubset",
    "EstimatorResult",
    "ExactResult",
    "Diagnostics",
    "TAIL_EPSILON",
    "min_density",
    "exact_delta",
    "singleton_estimates",
    "estimate_single",
    "estimate_subset",
    "estimate_avg",
    "estimate_all",
    "all_subsets",
]

TAIL_EPSILON = 1e-10
"""Probability mass dropped from each tail before integrating."""

# Quantile levels that seed the quadrature mesh for every density.
_MESH_LEVELS = (1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99, 0.999, 1 - 1e-6)


@dataclass(frozen=True, order=True)
class IndexSubset:
    """A nonempty set of 1-based population indices out of ``k``."""

    indices: tuple[int, ...]
    k: int

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        k = int(self.k)
        if not indices:
            raise UsageError("index subset must be nonempty")
        if any(b <= a for a, b in zip(indices, indices[1:])):
            raise UsageError(f"indices must be strictly increasing, got {indices}")
        if indices[0] < 1 or indices[-1] > k:
            raise UsageError(f"indices {indices} out of range 1..{k}")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "k", k)

    @classmethod
    def of(cls, k: int, *indices: int) -> "IndexSubset":
        """Build from indices in any order; duplicates are rejected."""
        if len(set(indices)) != len(indices):
            raise UsageError(f"duplicate index in {indices}")
        return cls(tuple(sorted(indices)), k)

    @classmethod
    def parse(cls, text: str, k: int) -> "IndexSubset":
        """Parse ``"1,2,3"`` (whitespace tolerated)."""
        try:
            indices = [int(tok) for tok in text.replace(" ", "").split(",") if tok]
        except ValueError:
            raise UsageError(f"cannot parse index subset {text!r}") from None
        return cls.of(k, *indices)

    @classmethod
    def full(cls, k: int) -> "IndexSubset":
        return cls(tuple(range(1, k + 1)), k)

    @property
    def label(self) -> str:
        return ",".join(map(str, self.indices))

    def __len__(self):
        return len(self.indices)

    def __str__(self):
        return f"({self.label})"


def all_subsets(k: int) -> list[IndexSubset]:
    """All ``2^k - 1`` nonempty subsets, by size then lexicographically."""
    return [
        IndexSubset(combo, k)
        for r in range(1, k + 1)
        for combo in itertools.combinations(range(1, k + 1), r)
    ]


@dataclass(frozen=True)
class EstimatorResult:
    subset: IndexSubset
    value: float


@dataclass(frozen=True)
class ExactResult:
    value: float
    est_abs_error: float


@dataclass
class Diagnostics:
    """Counters for numerically suspicious events during estimation.

    ``underflow`` counts sample points whose own-density estimate underflowed
    to zero; such points contribute a ratio of 0.
    """

    underflow: int = 0


def min_density(specs: Sequence[DistributionSpec], x):
    """Pointwise minimum of the densities at ``x`` (scalar or array)."""
    if not specs:
        raise UsageError("min_density needs at least one distribution")
    out = specs[0].pdf(x)
    for spec in specs[1:]:
        out = np.minimum(out, spec.pdf(x))
    return out


def exact_delta(
    specs: Sequence[DistributionSpec], tol: float = 1e-8, max_intervals: int = 4000
) -> ExactResult:
    """Overlap coefficient of known densities by adaptive quadrature.

    The integration range runs from the smallest ``TAIL_EPSILON`` quantile to
    the largest ``1 - TAIL_EPSILON`` quantile over all densities; since the
    minimum never exceeds any single density, the discarded area is at most
    ``2 * TAIL_EPSILON``, which is added to the reported error.

    Raises
    ------
    IntegrationError
        If the subdivision budget runs out first.
    """
    specs = list(specs)
    if not specs:
        raise UsageError("exact_delta needs at least one distribution")
    if not tol > 0:
        raise UsageError(f"tol must be > 0, got {tol}")
    lower = min(float(s.quantile(TAIL_EPSILON)) for s in specs)
    upper = max(float(s.quantile(1 - TAIL_EPSILON)) for s in specs)
    mesh = [lower, upper]
    for s in specs:
        mesh.extend(float(q) for q in s.quantile(np.array(_MESH_LEVELS)))
    mesh = [m for m in mesh if lower <= m <= upper]

    f = lambda x: min_density(specs, x)
    result = integrate(f, mesh, tol, max_intervals)
    if not _inside_unit(result.value, result.error + 2 * TAIL_EPSILON):
        # near 0 or 1 a bound of size tol can stick out of [0, 1]; refine once
        try:
            result = integrate(f, mesh, tol / 100, max_intervals)
        except IntegrationError:
            pass
    err = result.error + 2 * TAIL_EPSILON
    # the true overlap lies in [0, 1]; report the intersection with that range
    lo = max(result.value - err, 0.0)
    hi = min(result.value + err, 1.0)
    if lo > hi:
        lo = hi = min(max(result.value, 0.0), 1.0)
    return ExactResult(0.5 * (lo + hi), 0.5 * (hi - lo))


def _inside_unit(value: float, err: float) -> bool:
    return value - err >= 0.0 and value + err <= 1.0


def _check_inputs(models: Sequence[KdeModel], samples: Sequence[Sample]) -> int:
    k = len(samples)
    if len(models) != k:
        raise UsageError(f"got {len(models)} models for {k} samples")
    if k < 2:
        raise UsageError(f"need at least 2 samples, got {k}")
    for m, (model, smp) in enumerate(zip(models, samples), start=1):
        if model.n != len(smp) or not np.array_equal(model.data, np.sort(smp.values)):
            raise UsageError(f"model {m} was not fitted from sample {m}")
    return k


def _ratio_mean(ratios: np.ndarray) -> float:
    # left-to-right accumulation in sample order
    return float(np.cumsum(ratios)[-1] / ratios.size)


def singleton_estimates(
    models: Sequence[KdeModel],
    samples: Sequence[Sample],
    diagnostics: Diagnostics | None = None,
) -> list[float]:
    """All k singleton estimates, evaluating every model once on the pooled points."""
    k = _check_inputs(models, samples)
    sizes = [len(s) for s in samples]
    pooled = np.concatenate([s.values for s in samples])
    dens = np.stack([model.evaluate_batch(pooled) for model in models])
    lowest = dens.min(axis=0)

    out = []
    offsets = np.cumsum([0] + sizes)
    for i in range(k):
        lo, hi = offsets[i], offsets[i + 1]
        own = dens[i, lo:hi]
        underflow = own <= 0
        if underflow.any():
            if diagnostics is not None:
                diagnostics.underflow += int(underflow.sum())
            ratios = np.where(underflow, 0.0, lowest[lo:hi] / np.where(underflow, 1.0, own))
        else:
            ratios = lowest[lo:hi] / own
        out.append(_ratio_mean(ratios))
    return out


def _subset_mean(singletons: Sequence[float], subset: IndexSubset) -> float:
    total = 0.0
    for i in subset.indices:
        total += singletons[i - 1]
    return total / len(subset)


def estimate_single(
    i: int,
    models: Sequence[KdeModel],
    samples: Sequence[Sample],
    diagnostics: Diagnostics | None = None,
) -> EstimatorResult:
    k = _check_inputs(models, samples)
    subset = IndexSubset((i,), k)
    return EstimatorResult(subset, singleton_estimates(models, samples, diagnostics)[i - 1])


def estimate_subset(
    subset: IndexSubset,
    models: Sequence[KdeModel],
    samples: Sequence[Sample],
    diagnostics: Diagnostics | None = None,
) -> EstimatorResult:
    return estimate_all(models, samples, [subset], diagnostics)[0]


def estimate_avg(
    models: Sequence[KdeModel],
    samples: Sequence[Sample],
    diagnostics: Diagnostics | None = None,
) -> EstimatorResult:
    """The unweighted mean of all k singleton estimators."""
    return estimate_subset(IndexSubset.full(len(samples)), models, samples, diagnostics)


def estimate_all(
    models: Sequence[KdeModel],
    samples: Sequence[Sample],
    subsets: Iterable[IndexSubset],
    diagnostics: Diagnostics | None = None,
) -> list[EstimatorResult]:
    """Estimates for many subsets from a single pass over the singletons."""
    subsets = list(subsets)
    if not subsets:
        return []
    k = _check_inputs(models, samples)
    if len(set(subsets)) != len(subsets):
        raise UsageError("duplicate subsets requested")
    for s in subsets:
        if s.k != k:
            raise UsageError(f"subset {s} is defined for k={s.k}, data has k={k}")
    singletons = singleton_estimates(models, samples, diagnostics)
    return [EstimatorResult(s, _subset_mean(singletons, s)) for s in subsets]

