"""Property suite shared by the ``verify`` subcommand and the acceptance tests.

Each check returns a :class:`CheckResult`. Profiles and constants are
computed once per :class:`VerifyContext` and reused across checks.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bubble_field import CorrectionField, a2_epsilon_sweep, flux_residual, phi0_eval
from .energy_constants import compute_energy_constants, interaction_sweep
from .ground_state import (
    DEFAULT_TOL,
    RadialProfile,
    solve_ground_state,
    verify_tail_bounds,
)
from .lattice import PeakConfig, Q3_constant, normalized_sum, regime_exponent_check
from .params import SystemParams
from .reduced_energy import (
    ReducedEnergyModel,
    d2F,
    dF,
    derivative_scale,
    lambda_star,
    maximize_numeric,
)
from .quadrature import sphere_area
from . import weighted_norms as wn

FAULTS = ("corrupt-tail-b",)


@dataclass
class CheckResult:
    name: str
    criterion: str
    passed: bool
    value: float
    threshold: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: value={self.value:.6g} threshold={self.threshold:.6g}"

    def to_dict(self) -> dict:
        return {"name": self.name, "criterion": self.criterion, "passed": bool(self.passed),
                "value": float(self.value), "threshold": float(self.threshold),
                "seconds": round(self.seconds, 3), "detail": _plain(self.detail)}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


class VerifyContext:
    """Lazily solved profiles keyed by ``(N, p)``; ``fault`` corrupts one of them."""

    def __init__(self, quick: bool = False, seed: int = 0, tol: float = DEFAULT_TOL,
                 fault: str | None = None):
        if fault is not None and fault not in FAULTS:
            raise ValueError(f"unknown fault {fault!r}; choose from {FAULTS}")
        self.quick = quick
        self.seed = seed
        self.tol = tol
        self.fault = fault
        self._profiles: dict = {}
        self._times: dict = {}
        self._constants: dict = {}

    def params(self, N: int, p: float) -> SystemParams:
        return SystemParams.create(N, p)

    def profile(self, N: int, p: float) -> RadialProfile:
        key = (N, float(p))
        if key not in self._profiles:
            t = time.perf_counter()
            prof = solve_ground_state(self.params(N, p), tol=self.tol)
            self._times[key] = time.perf_counter() - t
            self._profiles[key] = prof
        return self._profiles[key]

    def solve_time(self, N: int, p: float) -> float:
        self.profile(N, p)
        return self._times[(N, float(p))]

    def tail_profile(self, N: int, p: float) -> RadialProfile:
        """The profile handed to the tail-bound check, with the fault applied if requested."""
        prof = self.profile(N, p)
        if self.fault == "corrupt-tail-b":
            prof = prof.with_tails(prof.tail_a, 1.1 * prof.tail_b)
        return prof

    def constants(self, N: int, p: float):
        key = (N, float(p))
        if key not in self._constants:
            self._constants[key] = compute_energy_constants(self.profile(N, p), self.params(N, p))
        return self._constants[key]


# ------------------------------------------------------------------ checks

def check_talenti(ctx: VerifyContext, N: int) -> CheckResult:
    p = (N + 2) / (N - 2)
    t0 = time.perf_counter()
    prof = ctx.profile(N, p)
    secs = ctx.solve_time(N, p)
    r = np.linspace(0.0, 50.0, 5001)
    exact = (1.0 + r * r / (N * (N - 2))) ** (-(N - 2) / 2)
    sup = float(np.max(np.abs(prof.u(r) - exact)))
    beta_err = abs(prof.beta - 1.0)
    ok = beta_err <= 1e-6 and sup <= 1e-5 and secs <= 10.0
    return CheckResult(f"talenti_N{N}", "1", ok, sup, 1e-5, time.perf_counter() - t0,
                       {"beta": prof.beta, "beta_error": beta_err, "solve_seconds": secs})


def check_decay_constants(ctx: VerifyContext, N: int) -> CheckResult:
    t0 = time.perf_counter()
    p = (N + 2) / (N - 2)
    prof = ctx.profile(N, p)
    exact = float(N * (N - 2)) ** ((N - 2) / 2)
    rel = max(abs(prof.tail_a / exact - 1), abs(prof.tail_b / exact - 1))
    return CheckResult(f"decay_constants_N{N}", "2", rel <= 5e-3, rel, 5e-3,
                       time.perf_counter() - t0,
                       {"a": prof.tail_a, "b": prof.tail_b, "exact": exact})


def check_tail_bounds(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    rep = verify_tail_bounds(ctx.tail_profile(5, 2.2))
    d = rep.to_dict()
    worst = max(abs(d[f"{k}_sup_grown"] / d[f"{k}_sup"] - 1) for k in ("v", "dv", "u", "du"))
    return CheckResult("tail_bounds_N5_p2.2", "3", rep.passed, worst, rep.stabilization_tol,
                       time.perf_counter() - t0, d)


def check_interaction(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    N, p = 5, 7 / 3
    prof = ctx.profile(N, p)
    A4 = ctx.constants(N, p).A4
    sw = interaction_sweep(prof, ctx.params(N, p), A4=A4)
    secs = time.perf_counter() - t0
    slope_err = abs(sw.leading_exponent + (N - 2))
    ok = slope_err <= 0.05 and sw.relative_gap <= 0.02 and sw.second_exponent > N - 2 and secs <= 60
    return CheckResult("interaction_rate_N5", "4", ok, slope_err, 0.05, secs, sw.to_dict())


def check_lattice_Q3(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    Q3 = Q3_constant(5)
    e64 = abs(normalized_sum(5, 64) / Q3 - 1)
    e1024 = abs(normalized_sum(5, 1024) / Q3 - 1)
    ok = e64 <= 0.01 and e1024 <= 0.002
    return CheckResult("lattice_Q3_N5", "5", ok, e1024, 0.002, time.perf_counter() - t0,
                       {"Q3": Q3, "rel_error_k64": e64, "rel_error_k1024": e1024})


def check_lattice_regimes(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    log_ks = (64, 256, 1024, 4096) if ctx.quick else tuple(2 ** e for e in range(6, 13))
    reps = {"log": regime_exponent_check(5, 1.0, log_ks)}
    if not ctx.quick:
        reps["power"] = regime_exponent_check(5, 2.0)
        reps["linear"] = regime_exponent_check(5, 0.5)
    ok = all(r.passed for r in reps.values())
    return CheckResult("lattice_regimes_N5", "5", ok, reps["log"].log_ratio_spread, 0.03,
                       time.perf_counter() - t0, {k: v.to_dict() for k, v in reps.items()})


def random_models(n: int, seed: int) -> list[ReducedEnergyModel]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        N = int(rng.integers(5, 9))
        m = ReducedEnergyModel(Q0=1.0, Q1=float(10 ** rng.uniform(-1, 1)),
                               Q4=float(10 ** rng.uniform(-1, 1)),
                               gamma=-float(10 ** rng.uniform(-1, 0.7)),
                               epsilon=float(10 ** rng.uniform(-3, -1)), k=int(rng.integers(1, 50)),
                               N=N)
        if 10 * m.delta < lambda_star(m) < 0.1 / m.delta:
            out.append(m)
    return out


def check_maximizer(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    worst_gap = worst_dF = 0.0
    concave = True
    models = random_models(20 if ctx.quick else 100, ctx.seed)
    for m in models:
        ls = lambda_star(m)
        num = maximize_numeric(m)
        worst_gap = max(worst_gap, abs(num - ls) / max(1.0, ls))
        worst_dF = max(worst_dF, abs(dF(m, num)) / derivative_scale(m))
        concave &= d2F(m, ls) < 0
    ok = worst_gap <= 1e-8 and worst_dF <= 1e-10 and concave
    return CheckResult("reduced_energy_maximizer", "6", ok, worst_gap, 1e-8,
                       time.perf_counter() - t0,
                       {"n_models": len(models), "max_dF_relative": worst_dF, "concave": concave})


def check_phi0(ctx: VerifyContext, N: int) -> CheckResult:
    t0 = time.perf_counter()
    c = CorrectionField(N, -1.0)
    rng = np.random.default_rng(ctx.seed)
    n = 10 if ctx.quick else 50
    z = np.zeros((n, N))
    z[:, : N - 1] = rng.uniform(-5.0, 5.0, (n, N - 1))
    fr = float(np.max(flux_residual(c, z)))
    ys = np.geomspace(10.0, 100.0, 9)
    direction = np.zeros(N)
    direction[0] = direction[-1] = 1 / math.sqrt(2)
    vals = np.abs(phi0_eval(c, ys[:, None] * direction))
    slope = float(np.polyfit(np.log(ys), np.log(vals), 1)[0])
    r = np.geomspace(0.1, 100.0, 25)
    weighted = np.abs(phi0_eval(c, r[:, None] * direction)) * (1 + r) ** (N - 3)
    ok = fr <= 1e-4 and abs(slope + (N - 3)) <= 0.15 and np.all(np.isfinite(weighted))
    return CheckResult(f"phi0_field_N{N}", "7", bool(ok), abs(slope + (N - 3)), 0.15,
                       time.perf_counter() - t0,
                       {"flux_residual": fr, "tail_slope": slope,
                        "weighted_sup": float(weighted.max())})


def check_A2(ctx: VerifyContext, N: int) -> CheckResult:
    t0 = time.perf_counter()
    p = (N + 2) / (N - 2)
    reps, bounded = a2_epsilon_sweep(ctx.profile(N, p), ctx.params(N, p), 1.0)
    consts = [r.constant for r in reps]
    return CheckResult(f"A2_bounds_N{N}", "7", bounded, max(consts) / consts[0], 1.10,
                       time.perf_counter() - t0, {"constants": consts})


def check_B1_B2(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    tau = SystemParams.create(5, 7 / 3).tau
    ks = (8, 16, 32) if ctx.quick else (8, 16, 32, 64)
    b1 = [wn.check_B1(PeakConfig.for_dimension(5, k), tau, seed=ctx.seed) for k in ks]
    b2 = wn.b2_distance_sweep(2.5, 2.0, 1.5, seed=ctx.seed)
    growth = float(b2[-1] / b2[-2] - 1)
    ok = max(b1) <= 2.0 and growth <= 0.05
    return CheckResult("weight_inequalities_B1_B2", "8", ok, growth, 0.05,
                       time.perf_counter() - t0, {"B1": b1, "B2": list(b2)})


def check_convolution(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    n = 5 if ctx.quick else 9
    ys = tuple(np.geomspace(100.0, 1e4, n))
    slow = wn.check_B3(5, 0.5, ys)
    fast = wn.check_B3(5, 10.0, ys)
    exact = sphere_area(4) / 2
    origin = wn.convolution_B3(5, 1.0, 0.0)[0]
    rel = abs(origin / exact - 1)
    ok = slow.exponent_gap <= 0.05 and fast.exponent_gap <= 0.05 and rel <= 1e-3
    return CheckResult("convolution_B3", "8", ok, max(slow.exponent_gap, fast.exponent_gap), 0.05,
                       time.perf_counter() - t0,
                       {"sigma_0.5": slow.fitted_exponent, "sigma_10": fast.fitted_exponent,
                        "origin_value": origin, "origin_exact": exact, "origin_rel_error": rel})


def check_positivity(ctx: VerifyContext, N: int, p: float) -> CheckResult:
    t0 = time.perf_counter()
    ec = ctx.constants(N, p)
    margins = {q: ec.error(q) / getattr(ec, q) for q in ("Q0", "Q1", "Q2", "Q4")}
    ok = all(getattr(ec, q) > 0 and margins[q] < 1 for q in margins)
    return CheckResult(f"positivity_N{N}_p{p:.4g}", "9", ok, max(margins.values()), 1.0,
                       time.perf_counter() - t0,
                       {q: [getattr(ec, q), ec.error(q)] for q in margins})


def check_invariants(ctx: VerifyContext) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(ctx.seed)
    hyper = []
    for N in (5, 6, 7, 8):
        from .params import check_condition_A

        ps = [p for p in rng.uniform(1.0, (N + 2) / (N - 2), 40) if check_condition_A(N, p)]
        ps.append((N + 2) / (N - 2))
        hyper.extend(SystemParams.create(N, p).hyperbola_residual() for p in ps)
    gaps = {}
    for N in (5, 6):
        p = (N + 2) / (N - 2)
        gaps[N] = ctx.constants(N, p).symmetry_gaps()
    worst_gap = max(max(g.values()) for g in gaps.values())
    ok = max(hyper) <= 1e-12 and worst_gap <= 1e-9
    return CheckResult("hyperbola_and_symmetry", "10", ok, worst_gap, 1e-9,
                       time.perf_counter() - t0,
                       {"max_hyperbola_residual": max(hyper), "symmetry_gaps": gaps})


SUITE = (
    ("talenti_N6", lambda c: check_talenti(c, 6)),
    ("talenti_N5", lambda c: check_talenti(c, 5)),
    ("decay_constants_N6", lambda c: check_decay_constants(c, 6)),
    ("decay_constants_N5", lambda c: check_decay_constants(c, 5)),
    ("tail_bounds_N5_p2.2", check_tail_bounds),
    ("interaction_rate_N5", check_interaction),
    ("lattice_Q3_N5", check_lattice_Q3),
    ("lattice_regimes_N5", check_lattice_regimes),
    ("reduced_energy_maximizer", check_maximizer),
    ("phi0_field_N5", lambda c: check_phi0(c, 5)),
    ("phi0_field_N6", lambda c: check_phi0(c, 6)),
    ("A2_bounds_N5", lambda c: check_A2(c, 5)),
    ("A2_bounds_N6", lambda c: check_A2(c, 6)),
    ("weight_inequalities_B1_B2", check_B1_B2),
    ("convolution_B3", check_convolution),
    ("positivity_N6_p2", lambda c: check_positivity(c, 6, 2.0)),
    ("positivity_N5_p2.2", lambda c: check_positivity(c, 5, 2.2)),
    ("hyperbola_and_symmetry", check_invariants),
)


def run_suite(ctx: VerifyContext | None = None, only=None) -> list[CheckResult]:
    """Run every check (or those named in ``only``). Exceptions count as failures."""
    ctx = ctx or VerifyContext()
    out = []
    for name, fn in SUITE:
        if only is not None and name not in only:
            continue
        t0 = time.perf_counter()
        try:
            out.append(fn(ctx))
        except Exception as exc:  # a crashing check is a failed check
            out.append(CheckResult(name, "", False, math.nan, math.nan,
                                   time.perf_counter() - t0, {"error": repr(exc)}))
    return out


def summarize(results: list[CheckResult]) -> dict:
    return {"passed": all(r.passed for r in results),
            "failed": [r.name for r in results if not r.passed],
            "checks": [r.to_dict() for r in results]}
