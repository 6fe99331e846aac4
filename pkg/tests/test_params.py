import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neumann_peaks.params import (
    ParameterError,
    SystemParams,
    check_condition_A,
    critical_q,
    decay_regime,
    epsilon_of_k,
    tau_of,
)


@pytest.mark.parametrize("N, p, q", [(6, 2.0, 2.0), (5, 7 / 3, 7 / 3), (5, 2.2, 2.4782608695652173)])
def test_critical_q_values(N, p, q):
    assert critical_q(N, p) == pytest.approx(q, rel=1e-13)


def test_critical_q_rejects_no_admissible_q():
    with pytest.raises(ParameterError):
        critical_q(5, 0.5)


@pytest.mark.parametrize("N, p, ok", [(5, 2.1, True), (5, 2.0, False), (6, 2.0, True),
                                      (5, 7 / 3, True), (5, 2.4, False), (6, 1.6, False)])
def test_condition_A(N, p, ok):
    assert check_condition_A(N, p) is ok


@pytest.mark.parametrize("N, k, eps", [(5, 1, 1.0), (5, 32, 32 ** -1.5), (6, 81, 3 ** (-16 / 3))])
def test_epsilon_of_k(N, k, eps):
    assert epsilon_of_k(N, k) == pytest.approx(eps, rel=1e-14)


def test_epsilon_known_decimals():
    assert epsilon_of_k(5, 32) == pytest.approx(0.00552427, abs=1e-8)
    assert epsilon_of_k(6, 81) == pytest.approx(0.0028533, abs=1e-7)


def test_tau():
    assert tau_of(5) == pytest.approx(2 / 3)
    assert tau_of(6) == pytest.approx(3 / 4)


def test_regimes():
    assert decay_regime(5, 2.2) == "fast"
    assert decay_regime(5, 5 / 3) == "log"
    assert decay_regime(5, 1.5) == "slow"


@pytest.mark.parametrize("kw", [dict(N=4, p=2.0), dict(N=5, p=2.0), dict(N=5, p=2.2, mu=0),
                                dict(N=5, p=2.2, delta=1.5), dict(N=5, p=2.2, k=0)])
def test_create_rejects(kw):
    with pytest.raises(ParameterError):
        SystemParams.create(**kw)


def test_condition_A_can_be_relaxed_for_exploration():
    sp = SystemParams.create(5, 1.8, require_condition_A=False)
    assert sp.regime == "fast"


def test_config_round_trip(tmp_path):
    sp = SystemParams.create(5, 2.2, k=8, gamma=-0.5, mu=2.0, delta=0.05)
    path = tmp_path / "p.json"
    path.write_text(json.dumps(sp.to_config()))
    assert SystemParams.from_json(path) == sp
    assert SystemParams.from_json(path, k=16).k == 16


def test_config_unknown_key():
    with pytest.raises(ParameterError):
        SystemParams.from_config({"N": 5, "p": 2.2, "q": 3.0})


def test_scalings_sum_to_N_minus_2():
    sp = SystemParams.create(7, 1.6)
    assert sp.u_scaling + sp.v_scaling == pytest.approx(5.0, rel=1e-14)


@st.composite
def admissible(draw):
    N = draw(st.integers(5, 12))
    hi = (N + 2) / (N - 2)
    lo = 2.0 if N == 5 else (N + tau_of(N)) / (N - 2)
    frac = draw(st.floats(1e-6, 1.0))
    return N, lo + frac * (hi - lo)


@given(admissible())
@settings(max_examples=200, deadline=None)
def test_hyperbola_identity_holds(case):
    N, p = case
    sp = SystemParams.create(N, p)
    assert sp.hyperbola_residual() <= 1e-12
    assert sp.p <= sp.q * (1 + 1e-13)
    assert sp.epsilon == pytest.approx(sp.k ** (-(N - 2) / (N - 3)))


@given(st.integers(5, 10), st.integers(1, 10_000))
@settings(max_examples=100, deadline=None)
def test_epsilon_positive_and_decreasing(N, k):
    assert 0 < epsilon_of_k(N, k + 1) < epsilon_of_k(N, k) <= 1.0
    assert math.isfinite(epsilon_of_k(N, k))
