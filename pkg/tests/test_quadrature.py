import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neumann_peaks.quadrature import (
    QuadratureSpec,
    TailDivergenceError,
    bipolar_halfspace_integral,
    integrate,
    integrate_2d,
    radial_integral,
    sphere_area,
)


def test_sphere_areas():
    assert sphere_area(1) == pytest.approx(2 * math.pi)
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert sphere_area(4) == pytest.approx(8 * math.pi ** 2 / 3)


def test_gaussian_full_space():
    res = radial_integral(lambda r: np.exp(-r * r), 3)
    assert sphere_area(2) * res.value == pytest.approx(math.pi ** 1.5, rel=1e-10)


def test_talenti_power_integral():
    # substituting r^2 = 24 u reduces this to a Beta integral
    res = radial_integral(lambda r: (1 + r * r / 24) ** -6, 6)
    assert res.value == pytest.approx(230.4, rel=1e-8)


def test_divergent_tail_rejected():
    with pytest.raises(TailDivergenceError):
        radial_integral(lambda r: 1.0 / (1.0 + r), 1)


def test_infinite_interval_mapping():
    res = integrate(lambda x: 1.0 / (1.0 + x * x), [0.0, math.inf])
    assert res.value == pytest.approx(math.pi / 2, rel=1e-12)
    assert res.error <= 1e-9 * res.value


def test_2d_product():
    res = integrate_2d(lambda x, y: np.exp(-x) * np.cos(y), [0, math.inf], [0, math.pi / 2])
    assert res.value == pytest.approx(1.0, rel=1e-11)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_subdivisions=0)


@pytest.mark.parametrize("d", [0.0, 0.5, 2.0])
def test_gaussian_pair_halfspace(d):
    res = bipolar_halfspace_integral(lambda r1, r2: np.exp(-r1 * r1 - r2 * r2), d, 3)
    exact = 0.5 * (math.pi / 2) ** 1.5 * math.exp(-d * d / 2)
    assert res.value == pytest.approx(exact, rel=1e-9)


def test_bipolar_swap_symmetry():
    f = lambda a, b: (1 + a * a) ** -3 * (1 + b) ** -1  # noqa: E731
    g = lambda a, b: f(b, a)  # noqa: E731
    x = bipolar_halfspace_integral(f, 3.0, 5).value
    y = bipolar_halfspace_integral(g, 3.0, 5).value
    assert x == pytest.approx(y, rel=1e-8)


@given(st.floats(0.1, 10.0), st.floats(0.5, 8.0))
@settings(max_examples=40, deadline=None)
def test_exponential_moments(a, n):
    # int_0^inf x^n e^(-a x) dx = Gamma(n+1) / a^(n+1)
    res = integrate(lambda x: x ** n * np.exp(-a * x), [0.0, math.inf], scale=1.0 / a)
    assert res.value == pytest.approx(math.gamma(n + 1) / a ** (n + 1), rel=1e-9)
