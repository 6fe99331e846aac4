
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from neumann_peaks.bubble_field import Bubble, bubble_eval
from neumann_peaks.lattice import PeakConfig
from neumann_peaks.quadrature import sphere_area
from neumann_peaks.weighted_norms import (
    SampledField,
    _b2_ratio,
    b2_distance_sweep,
    check_B1,
    check_B2,
    check_B3,
    convolution_B3,
    export_report_csv,
    generate_samples,
    norm_exponent,
    pair_norm,
    peak_weight,
    star_norm,
)


def newton_oracle(N, sigma, Y):
    """Radial mass convolved with |y|^(2-N): the shell theorem gives a 1-D integral."""
    f = lambda r: r ** (N - 1) * (1 + r) ** (-2 - sigma) * max(Y, r) ** (2 - N)  # noqa: E731
    pts = [p for p in (0.5, 1.0, 2.0, 5.0, 10.0, 20.0) if p < Y] + ([Y] if Y > 0 else [])
    hi = max(Y, 1.0)
    body = quad(f, 0, hi, points=pts, epsabs=0, epsrel=1e-13, limit=500)[0]
    tail = quad(f, hi, np.inf, epsabs=0, epsrel=1e-13, limit=500)[0]
    return sphere_area(N - 1) * (body + tail)


@pytest.fixture(scope="module")
def cfg():
    return PeakConfig.for_dimension(5, 8)


def test_samples_deterministic(cfg):
    a = generate_samples(cfg, seed=4)
    b = generate_samples(cfg, seed=4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, generate_samples(cfg, seed=5))


def test_zero_field(cfg, params_n5):
    pts = generate_samples(cfg)
    assert star_norm(SampledField(pts, np.zeros(len(pts)), cfg, "v"), params_n5) == 0.0


@pytest.mark.parametrize("component, double", [("u", False), ("v", False), ("v", True)])
def test_weight_is_fixed_point(cfg, params_n5, component, double):
    pts = generate_samples(cfg)
    w = peak_weight(pts, cfg, norm_exponent(params_n5, component, double))
    assert star_norm(SampledField(pts, w, cfg, component), params_n5, double) == pytest.approx(1.0)


def test_norm_homogeneous(cfg, params_n5):
    pts = generate_samples(cfg)
    f = SampledField(pts, np.sin(pts[:, 0]), cfg, "u")
    assert star_norm(f.scaled(-3.0), params_n5) == pytest.approx(3 * star_norm(f, params_n5))
    assert pair_norm(f, f.scaled(2.0), params_n5) > 0


def test_bubble_field_norm_finite(profile_n5, params_n5):
    cfg1 = PeakConfig.for_dimension(5, 1)
    x1 = cfg1.points[0]
    rng = np.random.default_rng(0)
    d = rng.normal(size=(400, 5))
    pts = x1 + np.geomspace(1e-2, 1e3, 400)[:, None] * d / np.linalg.norm(d, axis=1, keepdims=True)
    _, v = bubble_eval(Bubble(profile_n5, 1.0, x1), pts)
    val = star_norm(SampledField(pts, v, cfg1, "v"), params_n5)
    assert 0 < val < 10 * profile_n5.tail_b


def test_field_validation(cfg):
    with pytest.raises(ValueError):
        SampledField(np.zeros((3, 5)), np.zeros(2), cfg, "u")
    with pytest.raises(ValueError):
        SampledField(np.zeros((3, 5)), np.zeros(3), cfg, "w")


def test_B1_single_peak():
    assert check_B1(PeakConfig(1, 0.1, 5), 2.0) <= 1.0


def test_B1_at_peak(cfg):
    val = check_B1(cfg, 2.0 / 3, samples=cfg.points[:1])
    assert val <= 1.0


def test_B1_uniform_in_k(params_n5):
    vals = [check_B1(PeakConfig.for_dimension(5, k), params_n5.tau) for k in (8, 16, 32, 64)]
    assert max(vals) / min(vals) - 1 < 0.10


def test_B2_sigma_zero_midpoint():
    xi, xj = np.zeros(3), np.array([10.0, 0, 0])
    assert _b2_ratio(0.5 * (xi + xj), 2.0, 2.0, 0.0, xi, xj)[0] <= 1.0


def test_B2_dense_grid_oracle():
    xi, xj = np.zeros(3), np.array([10.0, 0, 0])
    seg = xi + np.linspace(0, 1, 401)[:, None] * (xj - xi)
    dense = xi + np.linspace(0, 1, 200001)[:, None] * (xj - xi)
    got = check_B2(2.0, 2.0, 2.0, xi, xj, samples=seg)
    brute = float(np.max(_b2_ratio(dense, 2.0, 2.0, 2.0, xi, xj)))
    assert got == pytest.approx(brute, rel=0.01)


def test_B2_preconditions():
    xi, xj = np.zeros(3), np.ones(3)
    with pytest.raises(ValueError):
        check_B2(1.0, 2.0, 0.5, xi, xj)
    with pytest.raises(ValueError):
        check_B2(2.0, 2.0, 2.5, xi, xj)
    with pytest.raises(ValueError):
        check_B2(2.0, 2.0, 1.0, xi, xi)


def test_B2_bounded_in_distance():
    vals = b2_distance_sweep(2.5, 2.0, 1.5)
    assert vals[-1] / vals[-2] - 1 < 0.05
    assert np.all(np.isfinite(vals))


def test_B3_origin_exact():
    val, err = convolution_B3(5, 1.0, 0.0)
    assert val == pytest.approx(sphere_area(4) / 2, rel=1e-8)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 10.0])
@pytest.mark.parametrize("Y", [0.5, 3.0, 100.0, 1e4])
def test_B3_against_newton_oracle(sigma, Y):
    assert convolution_B3(5, sigma, Y)[0] == pytest.approx(newton_oracle(5, sigma, Y), rel=1e-6)


def test_B3_regimes():
    slow = check_B3(5, 0.5)
    fast = check_B3(5, 10.0)
    assert slow.fitted_exponent == pytest.approx(0.5, abs=0.05)
    assert fast.fitted_exponent == pytest.approx(3.0, abs=0.05)
    assert np.isfinite(slow.sup_weighted) and np.isfinite(fast.sup_weighted)
    with pytest.raises(ValueError):
        check_B3(5, 3.0)


def test_report_csv(tmp_path):
    export_report_csv(tmp_path / "r.csv", [{"alpha": 2.0, "constant": 1.5, "passed": True}])
    assert (tmp_path / "r.csv").read_text().splitlines()[0] == "alpha,constant,passed"
    with pytest.raises(ValueError):
        export_report_csv(tmp_path / "e.csv", [])


@given(st.floats(1.1, 5.0), st.floats(1.1, 5.0), st.floats(0.0, 1.0), st.floats(2.0, 200.0))
@settings(max_examples=60, deadline=None)
def test_B2_constant_bounded(alpha, beta, frac, d):
    sigma = frac * min(alpha, beta)
    xi, xj = np.zeros(3), np.array([d, 0.0, 0.0])
    # the inequality holds with a constant depending only on the exponents
    assert check_B2(alpha, beta, sigma, xi, xj) <= 2.0 ** (alpha + beta)


@given(st.integers(1, 40), st.floats(0.3, 4.0))
@settings(max_examples=40, deadline=None)
def test_B1_at_least_one_term(k, alpha):
    cfg = PeakConfig(k, 0.05, 5)
    # sampling at a peak gives at least 1 in the numerator
    assert check_B1(cfg, alpha, samples=cfg.points[:1]) > 0
