import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from neumann_peaks.lattice import (
    PeakConfig,
    Q3_constant,
    export_sweep_csv,
    lattice_sum,
    normalized_sum,
    pairwise_distance,
    regime_exponent_check,
    richardson_Q3,
    zeta,
)


@pytest.mark.parametrize("s", [1.5, 2.0, 3.0, 4.0, 7.5])
def test_zeta_against_scipy(s):
    assert zeta(s) == pytest.approx(scipy.special.zeta(s), rel=1e-15)


def test_zeta_closed_forms():
    assert zeta(2.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-15)
    assert zeta(4.0) == pytest.approx(math.pi ** 4 / 90, rel=1e-15)
    with pytest.raises(ValueError):
        zeta(1.0)


def test_distances():
    eps = 0.1
    assert pairwise_distance(PeakConfig(2, eps), 0, 1) == pytest.approx(2 / eps)
    assert pairwise_distance(PeakConfig(4, eps), 0, 1) == pytest.approx(math.sqrt(2) / eps)
    assert pairwise_distance(PeakConfig(6, eps), 0, 2) == pytest.approx(math.sqrt(3) / eps)


def test_distance_errors():
    cfg = PeakConfig(4, 0.1)
    with pytest.raises(IndexError):
        pairwise_distance(cfg, 0, 4)
    with pytest.raises(ValueError):
        pairwise_distance(cfg, 1, 1)


def test_small_sums():
    eps = 0.2
    assert lattice_sum(PeakConfig(1, eps), 3.0) == 0.0
    assert lattice_sum(PeakConfig(2, eps), 2.5) == pytest.approx((eps / 2) ** 2.5)
    assert lattice_sum(PeakConfig(3, eps), 1.0) == pytest.approx(2 * eps / math.sqrt(3))


def test_Q3_values():
    assert Q3_constant(5) == pytest.approx(0.0096920449007292, rel=1e-13)
    assert Q3_constant(6) == pytest.approx(1 / 720, rel=1e-14)


def test_Q3_convergence():
    Q3 = Q3_constant(5)
    assert abs(normalized_sum(5, 64) / Q3 - 1) <= 0.01
    assert abs(normalized_sum(5, 1024) / Q3 - 1) <= 0.002
    ratios = [normalized_sum(5, k) / Q3 for k in (64, 128, 256, 512, 1024)]
    errs = np.abs(np.array(ratios) - 1)
    assert np.all(np.diff(errs) < 0)


@pytest.mark.parametrize("N", [5, 6])
def test_richardson_agrees_with_zeta(N):
    assert richardson_Q3(N) == pytest.approx(Q3_constant(N), rel=1e-6)


@pytest.mark.parametrize("alpha, regime", [(2.0, "power"), (1.0, "log"), (0.5, "linear")])
def test_regimes(alpha, regime):
    ks = tuple(2 ** e for e in range(6, 13)) if alpha == 1.0 else None
    rep = regime_exponent_check(5, alpha, ks)
    assert rep.observed_regime == regime, rep.to_dict()
    if alpha == 2.0:
        assert abs(rep.fitted_exponent - 2.0) <= 0.02
    if alpha == 1.0:
        assert rep.log_ratio_spread <= 0.03
        # sum / (eps k) ~ (1/pi) ln k
        assert rep.log_slope * math.pi == pytest.approx(1.0, rel=0.02)


def test_regime_needs_three_points():
    with pytest.raises(ValueError):
        regime_exponent_check(5, 2.0, (64, 128))


def test_export_sweep(tmp_path):
    rows = export_sweep_csv(tmp_path / "s.csv", 5, 3.0, [64, 128])
    text = (tmp_path / "s.csv").read_text().splitlines()
    assert text[0] == "k,alpha,sum,asymptotic,ratio"
    assert float(text[1].split(",")[2]) == rows[0]["sum"]


@given(st.integers(2, 300), st.floats(0.2, 6.0), st.integers(0, 299))
@settings(max_examples=100, deadline=None)
def test_sum_independent_of_base_peak(k, alpha, base):
    cfg = PeakConfig(k, 0.01, 5)
    b = base % k
    assert lattice_sum(cfg, alpha, b) == pytest.approx(lattice_sum(cfg, alpha, 0), rel=1e-12)


@given(st.integers(2, 200), st.floats(0.5, 5.0))
@settings(max_examples=100, deadline=None)
def test_sum_matches_brute_force(k, alpha):
    cfg = PeakConfig(k, 0.05, 5)
    pts = cfg.points
    brute = sum(np.linalg.norm(pts[j] - pts[0]) ** -alpha for j in range(1, k))
    assert lattice_sum(cfg, alpha) == pytest.approx(brute, rel=1e-10)
