"""
Parametric families used by the overlap study: Normal, extreme value, Weibull.

The extreme-value family is the minimum-type Gumbel law

    f(x) = (1/a) * exp(z - exp(z)),   z = (x - mu) / a,

and Weibull parameters follow the ``(shape, scale)`` order.  Normal is
parameterized by its variance; :meth:`DistributionSpec.normal` also accepts a
standard deviation so callers never have to square by hand.

All density functions accept scalars or arrays and return the same shape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special

from .errors import ParameterError

__all__ = [
    "Family",
    "Support",
    "DistributionSpec",
    "Sample",
    "pdf",
    "cdf",
    "quantile",
    "sample",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class Family(str, Enum):
    NORMAL = "normal"
    EXTREME_VALUE = "extreme"
    WEIBULL = "weibull"


class Support(str, Enum):
    REAL_LINE = "real"
    NON_NEGATIVE = "nonneg"


@dataclass(frozen=True)
class DistributionSpec:
    """A member of one of the three families.

    ``p1``/``p2`` are positional parameters with family-dependent meaning:

    ========  ===============  ================
    family    p1               p2
    ========  ===============  ================
    normal    mean             variance
    extreme   location         scale
    weibull   shape            scale
    ========  ===============  ================

    Prefer the named constructors :meth:`normal`, :meth:`extreme_value` and
    :meth:`weibull`.
    """

    family: Family
    p1: float
    p2: float
    _scale: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        family = Family(self.family)
        object.__setattr__(self, "family", family)
        p1, p2 = float(self.p1), float(self.p2)
        if not (math.isfinite(p1) and math.isfinite(p2)):
            raise ParameterError(f"{family.value}: parameters must be finite, got ({p1}, {p2})")
        if p2 <= 0:
            name = "variance" if family is Family.NORMAL else "scale"
            raise ParameterError(f"{family.value}: {name} must be > 0, got {p2}")
        if family is Family.WEIBULL and p1 <= 0:
            raise ParameterError(f"weibull: shape must be > 0, got {p1}")
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p2", p2)
        # Normal stores sigma once; the other families use p2 directly.
        object.__setattr__(self, "_scale", math.sqrt(p2) if family is Family.NORMAL else p2)

    @classmethod
    def normal(cls, mean: float, variance: float | None = None, *, sd: float | None = None):
        if (variance is None) == (sd is None):
            raise ParameterError("normal: give exactly one of variance or sd")
        if sd is not None:
            if not sd > 0:
                raise ParameterError(f"normal: sd must be > 0, got {sd}")
            variance = float(sd) ** 2
        return cls(Family.NORMAL, mean, variance)

    @classmethod
    def extreme_value(cls, location: float, scale: float):
        return cls(Family.EXTREME_VALUE, location, scale)

    @classmethod
    def weibull(cls, shape: float, scale: float):
        return cls(Family.WEIBULL, shape, scale)

    @property
    def support(self) -> Support:
        return Support.NON_NEGATIVE if self.family is Family.WEIBULL else Support.REAL_LINE

    @property
    def scale(self) -> float:
        """Scale parameter (standard deviation for the Normal family)."""
        return self._scale

    def describe(self) -> str:
        if self.family is Family.NORMAL:
            return f"N(mean={self.p1:g}, variance={self.p2:g})"
        if self.family is Family.EXTREME_VALUE:
            return f"Ex(location={self.p1:g}, scale={self.p2:g})"
        return f"W(shape={self.p1:g}, scale={self.p2:g})"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", under="ignore", divide="ignore", invalid="ignore"):
            if self.family is Family.NORMAL:
                z = (x - self.p1) / self._scale
                out = np.exp(-0.5 * z * z) / (self._scale * _SQRT_2PI)
            elif self.family is Family.EXTREME_VALUE:
                z = (x - self.p1) / self.p2
                out = np.exp(z - np.exp(z)) / self.p2
            else:
                shape, scale = self.p1, self.p2
                pos = x > 0
                t = np.where(pos, x, 1.0) / scale
                out = np.where(
                    pos, (shape / scale) * t ** (shape - 1.0) * np.exp(-(t**shape)), 0.0
                )
        return out[()] if out.ndim == 0 else out

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", under="ignore"):
            if self.family is Family.NORMAL:
                out = special.ndtr((x - self.p1) / self._scale)
            elif self.family is Family.EXTREME_VALUE:
                out = -np.expm1(-np.exp((x - self.p1) / self.p2))
            else:
                t = np.maximum(x, 0.0) / self.p2
                out = -np.expm1(-(t**self.p1))
        return out[()] if out.ndim == 0 else out

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(~((p > 0) & (p < 1))):
            raise ParameterError(f"quantile: probability must lie in (0, 1), got {p}")
        if self.family is Family.NORMAL:
            out = self.p1 + self._scale * special.ndtri(p)
        elif self.family is Family.EXTREME_VALUE:
            out = self.p1 + self.p2 * np.log(-np.log1p(-p))
        else:
            out = self.p2 * (-np.log1p(-p)) ** (1.0 / self.p1)
        return out[()] if out.ndim == 0 else out

    def sample(self, n: int, stream: np.random.Generator) -> "Sample":
        """Draw ``n`` i.i.d. values; consumes ``stream`` and nothing else."""
        n = int(n)
        if n < 1:
            raise ParameterError(f"sample size must be >= 1, got {n}")
        if self.family is Family.NORMAL:
            values = self.p1 + self._scale * stream.standard_normal(n)
        else:
            values = self.quantile(_open_uniform(stream, n))
        return Sample(values, self.support)


def _open_uniform(stream: np.random.Generator, n: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    return (stream.integers(0, 2**53, size=n, dtype=np.int64) + 0.5) * 2.0**-53


@dataclass(frozen=True, eq=False)
class Sample:
    """Observations drawn from one population, plus their declared support.

    ``values`` is stored as a read-only float array in the order given.
    """

    values: np.ndarray
    support: Support = Support.REAL_LINE

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.size == 0:
            raise ParameterError("a sample needs at least one value")
        if not np.all(np.isfinite(values)):
            raise ParameterError("sample values must be finite")
        support = Support(self.support)
        if support is Support.NON_NEGATIVE and np.any(values < 0):
            raise ParameterError("sample declared non-negative contains negative values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "support", support)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return self.support is other.support and np.array_equal(self.values, other.values)

    __hash__ = None


def pdf(spec: DistributionSpec, x):
    return spec.pdf(x)


def cdf(spec: DistributionSpec, x):
    return spec.cdf(x)


def quantile(spec: DistributionSpec, p):
    return spec.quantile(p)


def sample(spec: DistributionSpec, n: int, stream: np.random.Generator) -> Sample:
    return spec.sample(n, stream)
