"""Acceptance criteria 1-10 at their stated tolerances.

Each test records one pass/fail line, printed in the terminal summary.
"""
import pytest

from neumann_peaks import verify as V


@pytest.fixture(scope="module")
def ctx():
    return V.VerifyContext(quick=False, seed=0)


def _all(results):
    return all(r.passed for r in results)


def _describe(results):
    return "; ".join(f"{r.name} value={r.value:.4g} (limit {r.threshold:.4g})" for r in results)


def _check(record, number, results):
    ok = _all(results)
    record(number, ok, _describe(results))
    assert ok, [r.to_dict() for r in results if not r.passed]


def test_criterion_01_talenti_oracle(ctx, record_criterion):
    _check(record_criterion, 1, [V.check_talenti(ctx, 6), V.check_talenti(ctx, 5)])


def test_criterion_02_decay_constants(ctx, record_criterion):
    _check(record_criterion, 2, [V.check_decay_constants(ctx, 6), V.check_decay_constants(ctx, 5)])


def test_criterion_03_tail_remainders(ctx, record_criterion):
    _check(record_criterion, 3, [V.check_tail_bounds(ctx)])


def test_criterion_04_interaction_rate(ctx, record_criterion):
    _check(record_criterion, 4, [V.check_interaction(ctx)])


def test_criterion_05_lattice_asymptotics(ctx, record_criterion):
    _check(record_criterion, 5, [V.check_lattice_Q3(ctx), V.check_lattice_regimes(ctx)])


def test_criterion_06_reduced_energy(ctx, record_criterion):
    res = V.check_maximizer(ctx)
    assert res.detail["n_models"] == 100
    _check(record_criterion, 6, [res])


def test_criterion_07_correction_field(ctx, record_criterion):
    _check(record_criterion, 7, [V.check_phi0(ctx, 5), V.check_phi0(ctx, 6)])


def test_criterion_08_convolution_regimes(ctx, record_criterion):
    _check(record_criterion, 8, [V.check_convolution(ctx)])


def test_criterion_09_positivity(ctx, record_criterion):
    _check(record_criterion, 9, [V.check_positivity(ctx, 6, 2.0), V.check_positivity(ctx, 5, 2.2)])


def test_criterion_10_invariants(ctx, record_criterion):
    _check(record_criterion, 10, [V.check_invariants(ctx)])
