import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neumann_peaks.bubble_field import (
    Bubble,
    CorrectionField,
    a2_epsilon_sweep,
    bubble_eval,
    discrete_laplacian,
    flux_residual,
    phi0_eval,
    projected_bubble_approx,
    scaling_identity_residual,
    verify_A2_bounds,
)
from neumann_peaks.params import SystemParams

# phi0 at gamma = -1, computed with mpmath from the single-layer representation
# (1-D integrals on the axis, a 2-D integral off it)
PHI0_ORACLE = {
    5: [((0.0, 0.0), 0.25), ((0.0, 1.0), 0.125), ((0.0, 3.0), 0.0390625),
        ((2.0, 0.5), 0.118)],
    6: [((0.0, 0.0), 1 / 6), ((0.0, 1.0), 0.052083333333333333),
        ((0.0, 3.0), 0.0084635416666666667), ((2.0, 0.5), 0.043111902250201529)],
}


@pytest.fixture(scope="module")
def fields():
    return {N: CorrectionField(N, -1.0) for N in (5, 6)}


def _point(N, s, h):
    y = np.zeros(N)
    y[0], y[-1] = s, h
    return y


@pytest.mark.parametrize("N", [5, 6])
def test_phi0_oracle(fields, N):
    for (s, h), exact in PHI0_ORACLE[N]:
        assert phi0_eval(fields[N], _point(N, s, h)) == pytest.approx(exact, rel=1e-10)


def test_phi0_zero_curvature():
    c = CorrectionField(5, 0.0)
    assert phi0_eval(c, np.ones(5)) == 0.0


def test_phi0_linear_in_gamma(fields):
    y = _point(5, 1.0, 0.7)
    c2 = fields[5].with_gamma(2.5)
    assert phi0_eval(c2, y) == pytest.approx(-2.5 * phi0_eval(fields[5], y), rel=1e-14)


def test_phi0_rejects_lower_half_space(fields):
    with pytest.raises(ValueError):
        phi0_eval(fields[5], _point(5, 0.0, -1.0))


@pytest.mark.parametrize("N", [5, 6])
def test_flux_residual(fields, N):
    rng = np.random.default_rng(1)
    z = np.zeros((20, N))
    z[:, : N - 1] = rng.uniform(-4, 4, (20, N - 1))
    assert np.max(flux_residual(fields[N], z)) <= 1e-4


@pytest.mark.parametrize("N", [5, 6])
def test_phi0_harmonic(fields, N):
    lap = discrete_laplacian(fields[N], _point(N, 1.0, 1.5), step=0.05)
    assert abs(lap) <= 1e-3


@pytest.mark.parametrize("N", [5, 6])
def test_phi0_decay(fields, N):
    ys = np.geomspace(10, 100, 7)
    d = np.zeros(N)
    d[0] = d[-1] = 1 / math.sqrt(2)
    vals = np.abs(phi0_eval(fields[N], ys[:, None] * d))
    slope = np.polyfit(np.log(ys), np.log(vals), 1)[0]
    assert abs(slope + (N - 3)) <= 0.15


def test_scaling_identity():
    for N, p in ((5, 2.2), (6, 2.0), (7, 1.6)):
        assert abs(scaling_identity_residual(SystemParams.create(N, p))) <= 1e-12


def test_bubble_identity_scaling(profile_n6):
    u, v = bubble_eval(Bubble(profile_n6, 1.0, np.zeros(6)), np.zeros(6))
    assert (u, v) == pytest.approx((1.0, profile_n6.beta))


def test_bubble_dilation(profile_n6):
    u, _ = bubble_eval(Bubble(profile_n6, 2.0, np.zeros(6)), np.zeros(6))
    assert u == pytest.approx(4.0, rel=1e-12)


def test_bubble_validation(profile_n6):
    with pytest.raises(ValueError):
        Bubble(profile_n6, 0.0, np.zeros(6))
    with pytest.raises(ValueError):
        Bubble(profile_n6, 1.0, np.zeros(5))


def test_projected_bubble(profile_n5, params_n5, fields):
    x = np.zeros(5)
    U, V = projected_bubble_approx(profile_n5, params_n5.with_k(8), 1.0, x, x, fields[5])
    eps = params_n5.with_k(8).epsilon
    assert U == pytest.approx(1.0 - eps * 0.25, rel=1e-12)
    U0, V0 = projected_bubble_approx(profile_n5, params_n5, 1.0, x, x, fields[5], epsilon=0.0)
    assert (U0, V0) == pytest.approx((1.0, profile_n5.beta))
    flat = CorrectionField(5, 0.0)
    assert projected_bubble_approx(profile_n5, params_n5, 1.0, x, x, flat)[0] == pytest.approx(1.0)


def test_projected_bubble_preconditions(profile_n5, params_n5):
    with pytest.raises(ValueError):
        projected_bubble_approx(profile_n5, params_n5, 500.0, np.zeros(5), np.zeros(5))
    with pytest.raises(ValueError):
        projected_bubble_approx(profile_n5, params_n5, 1.0, np.ones(5), np.zeros(5))


def test_A2_zero_curvature(profile_n5, params_n5):
    rep = verify_A2_bounds(profile_n5, params_n5, 1.0, correction=CorrectionField(5, 0.0))
    assert rep.sup_numerator == 0.0


@pytest.mark.parametrize("N, p", [(5, 7 / 3), (6, 2.0)])
def test_A2_sweep_bounded(request, N, p):
    prof = request.getfixturevalue("profile_n5" if N == 5 else "profile_n6")
    reps, bounded = a2_epsilon_sweep(prof, SystemParams.create(N, p), 1.0)
    assert bounded
    if N >= 6:
        # no log factor: the normalized constant does not depend on eps
        consts = [r.constant for r in reps]
        assert max(consts) == pytest.approx(min(consts), rel=1e-12)


@given(st.floats(0.0, 20.0), st.floats(0.0, 20.0))
@settings(max_examples=30, deadline=None)
def test_phi0_positive_for_negative_curvature(s, h):
    c = _FIELD
    v, err = phi0_eval(c, _point(5, s, h), return_error=True)
    assert v > 0
    assert err <= 1e-8 * v


_FIELD = CorrectionField(5, -1.0)
