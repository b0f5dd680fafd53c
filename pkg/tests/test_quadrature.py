import math

import numpy as np
import pytest

from overlapk.errors import IntegrationError
from overlapk.quadrature import integrate


def test_polynomial_exact():
    res = integrate(lambda x: x**2, [0.0, 1.0], 1e-12)
    assert res.value == pytest.approx(1 / 3, rel=1e-15)


def test_kink_located_by_bisection():
    # kink at an irrational point the mesh does not know about
    c = 1 / math.sqrt(2)
    res = integrate(lambda x: np.abs(x - c), [0.0, 1.0], 1e-10)
    exact = (c**2 + (1 - c) ** 2) / 2
    assert abs(res.value - exact) <= 1e-10
    assert res.error <= 1e-10


def test_endpoint_singularity():
    res = integrate(lambda x: x**-0.5, [0.0, 1.0], 1e-8, max_intervals=10_000)
    assert res.value == pytest.approx(2.0, abs=1e-8)


def test_gaussian_with_breakpoints():
    f = lambda x: np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)
    res = integrate(f, [-10, -1, 0, 1, 10], 1e-12)
    assert res.value == pytest.approx(math.erf(10 / math.sqrt(2)), abs=1e-12)


def test_budget_exhaustion_raises():
    with pytest.raises(IntegrationError) as info:
        integrate(lambda x: np.abs(np.sin(50 * x)), [0.0, 10.0], 1e-14, max_intervals=5)
    assert info.value.error_estimate > 1e-14


def test_degenerate_range():
    assert integrate(np.cos, [1.0, 1.0], 1e-8).value == 0.0
    with pytest.raises(ValueError):
        integrate(np.cos, [0.0, 1.0], 0.0)
