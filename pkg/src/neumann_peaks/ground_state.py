"""Radial ground state of the limit Lane-Emden system by shooting.

The radial system is

    U'' + (N-1)/r U' + |V|^(p-1) V = 0,    V'' + (N-1)/r V' + |U|^(q-1) U = 0,

with U(0) = 1, V(0) = beta and zero slopes. For beta below the ground-state
value V crosses zero first, above it U does; bisection on that switch gives
beta*.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .params import SystemParams, decay_regime

R0 = 1e-3
DEFAULT_R_MAX = 200.0
DEFAULT_TOL = 1e-14
DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-13
DECAY_THRESHOLD = 1e-4
BETA_RANGE = (1e-3, 1e3)
SPREAD_LIMIT = 0.05


class GroundStateError(RuntimeError):
    pass


class NumericalFailure(GroundStateError):
    """The integrator gave up (step-size underflow or similar)."""


class BracketError(GroundStateError):
    pass


class TailFitError(GroundStateError):
    """The asymptotic window is not yet asymptotic; increase r_max."""


@dataclass(frozen=True)
class ShootOutcome:
    classification: str  # U_crossed_zero | V_crossed_zero | decayed | undecided
    r_event: float


def _series_start(N: int, p: float, q: float, beta: float, r: np.ndarray | float):
    """Regular expansion at the origin through r^4, returns (U, V, U', V')."""
    c1 = -beta ** p / (2 * N)
    c2 = p * beta ** (p - 1) / (8 * N * (N + 2))
    d1 = -1.0 / (2 * N)
    d2 = q * beta ** p / (8 * N * (N + 2))
    r2 = r * r
    return (1 + c1 * r2 + c2 * r2 * r2, beta + d1 * r2 + d2 * r2 * r2,
            2 * c1 * r + 4 * c2 * r * r2, 2 * d1 * r + 4 * d2 * r * r2)


def _rhs(N: int, p: float, q: float):
    def f(r, y):
        U, V, dU, dV = y
        return [dU, dV,
                -(N - 1) / r * dU - abs(V) ** (p - 1) * V,
                -(N - 1) / r * dV - abs(U) ** (q - 1) * U]
    return f


def _integrate(N, p, q, beta, r_max, rtol, atol, events=True, dense=False):
    y0 = list(_series_start(N, p, q, beta, R0))
    ev = []
    if events:
        def u_zero(r, y):
            return y[0]

        def v_zero(r, y):
            return y[1]

        for e in (u_zero, v_zero):
            e.terminal = True
            e.direction = -1
        ev = [u_zero, v_zero]
    sol = solve_ivp(_rhs(N, p, q), (R0, r_max), y0, method="DOP853", rtol=rtol, atol=atol,
                    events=ev or None, dense_output=dense)
    if sol.status == -1:
        raise NumericalFailure(f"integration failed at beta={beta!r}: {sol.message}")
    return sol


def shoot(params: SystemParams, beta: float, r_max: float = DEFAULT_R_MAX,
          tol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL,
          decay_threshold: float = DECAY_THRESHOLD) -> ShootOutcome:
    """Integrate from the origin and report the first sign event."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    if r_max <= R0:
        raise ValueError(f"r_max must exceed the series start {R0}")
    sol = _integrate(params.N, params.p, params.q, beta, r_max, tol, atol)
    tu, tv = sol.t_events
    if tu.size or tv.size:
        ru = tu[0] if tu.size else math.inf
        rv = tv[0] if tv.size else math.inf
        if ru <= rv:
            return ShootOutcome("U_crossed_zero", float(ru))
        return ShootOutcome("V_crossed_zero", float(rv))
    U, V, dU, dV = sol.y[:, -1]
    if U < decay_threshold and V < decay_threshold * beta and dU < 0 and dV < 0:
        return ShootOutcome("decayed", float(sol.t[-1]))
    return ShootOutcome("undecided", float(sol.t[-1]))


# ---------------------------------------------------------------------- profile

@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Sampled ground state plus its fitted power-law tails.

    Inside the grid values come from cubic Hermite interpolation using the
    stored derivatives; beyond ``r_trust`` from the fitted tail expansion.
    """

    N: int
    p: float
    q: float
    r_grid: np.ndarray
    U: np.ndarray
    V: np.ndarray
    dU: np.ndarray
    dV: np.ndarray
    beta: float
    tail_a: float = math.nan
    tail_b: float = math.nan
    regime: str = "fast"
    r_fit_window: tuple[float, float] = (math.nan, math.nan)
    meta: dict = field(default_factory=dict)
    tail_u_terms: tuple = ()
    tail_v_terms: tuple = ()

    @property
    def r_max(self) -> float:
        return float(self.r_grid[-1])

    @property
    def r_trust(self) -> float:
        """Radius beyond which the fitted tail expansion replaces the grid.

        Past the fit window the sampled values carry integrator drift (the
        growing homogeneous mode), so evaluation switches to the expansion.
        """
        hi = self.r_fit_window[1]
        if self.tail_u_terms and np.isfinite(hi) and hi < self.r_max:
            return float(hi)
        return self.r_max

    @cached_property
    def _splines(self):
        return (CubicHermiteSpline(self.r_grid, self.U, self.dU),
                CubicHermiteSpline(self.r_grid, self.V, self.dV))

    def _tail_u(self, r):
        N = self.N
        if self.regime == "fast":
            return _expansion(self.tail_a, self.tail_u_terms, 2.0 - N, r)
        if self.regime == "log":
            return self.tail_a * np.log(r) * r ** (2.0 - N)
        return self.tail_a * r ** (2.0 - (N - 2) * self.p)

    def _tail_du(self, r):
        N = self.N
        if self.regime == "fast":
            return _expansion_derivative(self.tail_a, self.tail_u_terms, 2.0 - N, r)
        if self.regime == "log":
            return self.tail_a * r ** (1.0 - N) * (1.0 - (N - 2) * np.log(r))
        m = (N - 2) * self.p - 2
        return -m * self.tail_a * r ** (-m - 1)

    def __call__(self, r):
        return evaluate_profile(self, r)

    def u(self, r):
        return self._piecewise(r, self._splines[0], self._tail_u)

    def v(self, r):
        return self._piecewise(r, self._splines[1],
                               lambda s: _expansion(self.tail_b, self.tail_v_terms, 2.0 - self.N, s))

    def du(self, r):
        return self._piecewise(r, self._splines[0].derivative(), self._tail_du)

    def dv(self, r):
        return self._piecewise(r, self._splines[1].derivative(),
                               lambda s: _expansion_derivative(self.tail_b, self.tail_v_terms,
                                                               2.0 - self.N, s))

    def _piecewise(self, r, spline, tail):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        inside = r <= self.r_trust
        out[inside] = spline(r[inside])
        if np.any(~inside):
            if not np.isfinite(self.tail_a) or not np.isfinite(self.tail_b):
                raise GroundStateError("tail constants not fitted; cannot extrapolate")
            out[~inside] = tail(r[~inside])
        return out

    def with_tails(self, a: float, b: float, regime: str | None = None,
                   window: tuple[float, float] | None = None, u_terms=(), v_terms=(),
                   **meta) -> "RadialProfile":
        """Copy with new tail constants; correction terms are dropped unless given."""
        merged = dict(self.meta)
        merged.update(meta)
        return RadialProfile(self.N, self.p, self.q, self.r_grid, self.U, self.V, self.dU,
                             self.dV, self.beta, a, b, regime or self.regime,
                             window or self.r_fit_window, merged,
                             tuple(map(tuple, u_terms)), tuple(map(tuple, v_terms)))

    # -- persistence -------------------------------------------------------

    def save(self, csv_path, json_path=None) -> None:
        """CSV with header r,U,V,dU,dV plus a JSON sidecar of scalar data."""
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        with csv_path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["r", "U", "V", "dU", "dV"])
            for row in zip(self.r_grid, self.U, self.V, self.dU, self.dV):
                w.writerow([repr(float(x)) for x in row])
        side = {"beta": self.beta, "tail_a": self.tail_a, "tail_b": self.tail_b,
                "regime": self.regime, "r_fit_window": list(self.r_fit_window),
                "N": self.N, "p": self.p, "q": self.q,
                "tail_u_terms": [list(t) for t in self.tail_u_terms],
                "tail_v_terms": [list(t) for t in self.tail_v_terms]}
        side.update({k: v for k, v in self.meta.items() if k not in side})
        json_path.write_text(json.dumps(side, indent=2, sort_keys=True))

    @classmethod
    def load(cls, csv_path, json_path=None) -> "RadialProfile":
        csv_path = Path(csv_path)
        json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        side = json.loads(json_path.read_text())
        meta = {k: v for k, v in side.items()
                if k not in {"beta", "tail_a", "tail_b", "regime", "r_fit_window",
                             "N", "p", "q", "tail_u_terms", "tail_v_terms"}}
        return cls(int(side["N"]), float(side["p"]), float(side["q"]), data[:, 0],
                   data[:, 1], data[:, 2], data[:, 3], data[:, 4], float(side["beta"]),
                   float(side["tail_a"]), float(side["tail_b"]), side["regime"],
                   tuple(side["r_fit_window"]), meta,
                   tuple(tuple(t) for t in side.get("tail_u_terms", ())),
                   tuple(tuple(t) for t in side.get("tail_v_terms", ())))


def _expansion(lead, terms, power, r):
    """``r^power (lead + sum c r^-e)``."""
    out = lead * r ** power
    for c, e in terms:
        out = out + c * r ** (power - e)
    return out


def _expansion_derivative(lead, terms, power, r):
    out = power * lead * r ** (power - 1)
    for c, e in terms:
        out = out + (power - e) * c * r ** (power - e - 1)
    return out


def evaluate_profile(profile: RadialProfile, r):
    """Return ``(U(r), V(r))``; scalars in, scalars out."""
    scalar = np.ndim(r) == 0
    u, v = profile.u(np.atleast_1d(r)), profile.v(np.atleast_1d(r))
    if scalar:
        return float(u[0]), float(v[0])
    return u, v


def default_grid(r_max: float, n_inner: int = 1000, n_outer: int = 8000) -> np.ndarray:
    inner = np.linspace(0.0, 1.0, n_inner + 1)
    outer = np.geomspace(1.0, r_max, n_outer + 1)[1:] if r_max > 1 else np.empty(0)
    return np.concatenate([inner[inner <= r_max], outer])


# ---------------------------------------------------------------------- solver

def find_bracket(params: SystemParams, beta_range=BETA_RANGE, n_grid: int = 25,
                 r_shoot: float = 1e6, rtol: float = DEFAULT_RTOL) -> tuple[float, float]:
    """Geometric scan for adjacent betas where V-crossing flips to U-crossing."""
    betas = np.geomspace(beta_range[0], beta_range[1], n_grid)
    prev = None
    for beta in betas:
        out = shoot(params, float(beta), r_shoot, rtol, atol=1e-30)
        if out.classification in ("decayed", "undecided"):
            return float(beta), float(beta)
        if prev is not None and prev[1] == "V_crossed_zero" and out.classification == "U_crossed_zero":
            return prev[0], float(beta)
        prev = (float(beta), out.classification)
    raise BracketError(f"no V/U crossing switch for beta in {beta_range}")


def bisect_beta(params: SystemParams, lo: float, hi: float, tol: float = DEFAULT_TOL,
                max_iter: int = 200, r_shoot: float = 1e6,
                rtol: float = DEFAULT_RTOL) -> tuple[float, float, list]:
    """Shrink the [V-crossing, U-crossing] bracket below ``tol``.

    Returns ``(lo, hi, history)``. A shot that stays positive out to
    ``r_shoot`` means beta is resolved to the integrator's precision.
    """
    history = []
    it = 0
    while hi - lo > tol:
        if it >= max_iter:
            raise GroundStateError(f"bisection did not converge in {max_iter} iterations")
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        out = shoot(params, mid, r_shoot, rtol, atol=1e-30)
        history.append((mid, out.classification, out.r_event))
        if out.classification == "V_crossed_zero":
            lo = mid
        elif out.classification == "U_crossed_zero":
            hi = mid
        else:
            lo = hi = mid
        it += 1
    return lo, hi, history


def solve_ground_state(
    params: SystemParams,
    tol: float = DEFAULT_TOL,
    r_max: float = DEFAULT_R_MAX,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    beta_range=BETA_RANGE,
    strict_fit: bool = True,
) -> RadialProfile:
    """Shoot for beta*, sample the profile on a fixed grid and fit its tails."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    params.check_hyperbola()
    N, p, q = params.N, params.p, params.q
    lo, hi = find_bracket(params, beta_range, rtol=rtol)
    lo, hi, history = bisect_beta(params, lo, hi, tol, rtol=rtol)
    beta = 0.5 * (lo + hi)
    sol = _integrate(N, p, q, beta, r_max, rtol, atol, events=True, dense=True)
    if sol.t[-1] < r_max:
        raise NumericalFailure(
            f"profile at beta={beta!r} loses positivity at r={sol.t[-1]:.4g} < r_max; "
            "tighten tol or reduce r_max")
    r = default_grid(r_max)
    U, V, dU, dV = np.empty_like(r), np.empty_like(r), np.empty_like(r), np.empty_like(r)
    near = r < R0
    U[near], V[near], dU[near], dV[near] = _series_start(N, p, q, beta, r[near])
    far = ~near
    U[far], V[far], dU[far], dV[far] = sol.sol(r[far])
    U[0], V[0], dU[0], dV[0] = 1.0, beta, 0.0, 0.0
    raw = RadialProfile(N, p, q, r, U, V, dU, dV, beta, regime=decay_regime(N, p),
                        meta={"beta_bracket": [lo, hi], "bisection_steps": len(history),
                              "tol": tol, "rtol": rtol, "atol": atol})
    fit = extract_decay_constants(raw, strict=strict_fit)
    return raw.with_tails(fit.a, fit.b, fit.regime, fit.window, fit.u_terms, fit.v_terms,
                          fit_spread=fit.spread, l1_identity_ratio=fit.l1_identity_ratio)


# ------------------------------------------------------------------- tail fits

@dataclass(frozen=True)
class DecayFit:
    a: float
    b: float
    regime: str
    window: tuple[float, float]
    spread: float
    a_flux: float
    b_flux: float
    l1_identity_ratio: float
    u_terms: tuple = ()
    v_terms: tuple = ()

    @property
    def flagged(self) -> bool:
        return self.spread > SPREAD_LIMIT


def _correction_exponents(N: int, p: float, q: float):
    kappa_u = (N - 2) * p - N
    kappa_v = (N - 2) * q - N
    return kappa_u, kappa_v


def _lsq_fit(r, y, exponents):
    """Least-squares fit ``y = c0 + sum c_i r^-e_i``.

    Returns ``(c0, ((c_i, e_i), ...))`` for the decaying terms ``e_i > 0``.
    """
    exps = []
    for e in exponents:
        if abs(e) > 1e-3 and all(abs(e - f) > 1e-3 for f in exps):
            exps.append(float(e))
    x = r / r[0]
    cols = [np.ones_like(r)] + [x ** (-e) for e in exps]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), y, rcond=None)
    terms = tuple((float(c * r[0] ** e), e) for c, e in zip(coef[1:], exps) if e > 0)
    return float(coef[0]), terms


def flux_integrals(profile: RadialProfile) -> tuple[float, float]:
    """``(int_0^R s^(N-1) V^p ds, int_0^R s^(N-1) U^q ds)`` over the grid."""
    N = profile.N
    r = profile.r_grid
    x, w = np.polynomial.legendre.leggauss(4)
    mid, half = 0.5 * (r[1:] + r[:-1]), 0.5 * (r[1:] - r[:-1])
    s = mid[:, None] + half[:, None] * x[None, :]
    sv = np.clip(profile.v(s.ravel()).reshape(s.shape), 0, None)
    su = np.clip(profile.u(s.ravel()).reshape(s.shape), 0, None)
    fv = half * ((s ** (N - 1) * sv ** profile.p) @ w)
    fu = half * ((s ** (N - 1) * su ** profile.q) @ w)
    return np.concatenate([[0.0], np.cumsum(fv)]), np.concatenate([[0.0], np.cumsum(fu)])


def extract_decay_constants(profile: RadialProfile, window: tuple[float, float] | None = None,
                            strict: bool = True) -> DecayFit:
    """Fit the power-law tail constants ``a`` (of U) and ``b`` (of V).

    The normalized tails ``r^(N-2) V`` (and the regime-matched form of U) are
    fitted on the window with the leading constant plus the first algebraic
    corrections implied by the system.
    """
    N, p, q = profile.N, profile.p, profile.q
    r_max = profile.r_max
    lo, hi = window or (r_max / 4.0, r_max / 2.0)
    sel = (profile.r_grid >= lo) & (profile.r_grid <= hi)
    r = profile.r_grid[sel]
    if r.size < 8:
        raise TailFitError(f"too few grid points in the fit window [{lo}, {hi}]")
    U, V = profile.U[sel], profile.V[sel]
    regime = decay_regime(N, p)
    ku, kv = _correction_exponents(N, p, q)
    # beta* is only resolved to rounding, which leaves a trace of the growing
    # homogeneous mode r^(N-2) (1 + c r^-kappa) in the far field; fit it out
    grow = [-(N - 2.0), -(N - 2.0) + min(ku, kv)]
    yv = r ** (N - 2) * V
    b, v_terms = _lsq_fit(r, yv, [kv, kv + max(ku, 0), 2 * kv, 3 * kv] + grow)
    u_terms = ()
    if regime == "fast":
        yu = r ** (N - 2) * U
        a, u_terms = _lsq_fit(r, yu, [ku, ku + kv, 2 * ku, 3 * ku] + grow)
    elif regime == "log":
        yu = r ** (N - 2) * U / np.log(r)
        a, _ = _lsq_fit(np.log(r), yu, [1.0, 2.0])
    else:
        m = (N - 2) * p - 2
        yu = r ** m * U
        a, _ = _lsq_fit(r, yu, [N - (N - 2) * p, 2.0])
    spread = max(np.ptp(yv) / abs(np.mean(yv)), np.ptp(yu) / abs(np.mean(yu)))
    fv, fu = flux_integrals(profile)
    # the flux identities hold in the fast regime only
    a_flux = (fv[-1] + b ** p * r_max ** (N - (N - 2) * p) / ((N - 2) * p - N)) / (N - 2)
    b_flux = (fu[-1] + a ** q * r_max ** (N - (N - 2) * q) / ((N - 2) * q - N)) / (N - 2)
    ratio = b ** p / (a * ((N - 2) * p - 2) * abs(N - (N - 2) * p)) if p != N / (N - 2) else math.nan
    fit = DecayFit(a, b, regime, (float(lo), float(hi)), float(spread), float(a_flux),
                   float(b_flux), float(ratio), u_terms, v_terms)
    if fit.flagged:
        msg = (f"tail fit spread {spread:.3%} exceeds {SPREAD_LIMIT:.0%} on [{lo:.4g}, {hi:.4g}]; "
               "increase r_max")
        if strict:
            raise TailFitError(msg)
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    return fit


def ode_residual(profile: RadialProfile) -> float:
    """Scaled residual of both equations in flux form on the grid.

    ``r^(N-1) U'(r) + int_0^r s^(N-1) V^p ds`` vanishes for an exact solution;
    the maximum is divided by the total flux.
    """
    N = profile.N
    r = profile.r_grid
    fv, fu = flux_integrals(profile)
    res_u = np.abs(r ** (N - 1) * profile.dU + fv) / fv[-1]
    res_v = np.abs(r ** (N - 1) * profile.dV + fu) / fu[-1]
    return float(max(res_u[1:].max(), res_v[1:].max()))


# ------------------------------------------------------------ remainder bounds

@dataclass(frozen=True)
class TailBoundReport:
    window: tuple[float, float]
    grown_window: tuple[float, float]
    v_sup: float
    dv_sup: float
    u_sup: float
    du_sup: float
    v_sup_grown: float
    dv_sup_grown: float
    u_sup_grown: float
    du_sup_grown: float
    kappa0: float
    stabilization_tol: float = 0.05

    @staticmethod
    def _stable(a: float, b: float, tol: float) -> bool:
        return bool(np.isfinite(a) and np.isfinite(b) and abs(b - a) <= tol * abs(a))

    @property
    def v_ok(self) -> bool:
        return (self._stable(self.v_sup, self.v_sup_grown, self.stabilization_tol)
                and self._stable(self.dv_sup, self.dv_sup_grown, self.stabilization_tol))

    @property
    def u_ok(self) -> bool:
        return (self._stable(self.u_sup, self.u_sup_grown, self.stabilization_tol)
                and self._stable(self.du_sup, self.du_sup_grown, self.stabilization_tol))

    @property
    def passed(self) -> bool:
        return self.v_ok and self.u_ok

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out.update(v_ok=self.v_ok, u_ok=self.u_ok, passed=self.passed)
        return out


def _remainder_sups(profile: RadialProfile, lo: float, hi: float, a: float, b: float):
    N, p = profile.N, profile.p
    sel = (profile.r_grid >= lo) & (profile.r_grid <= hi)
    r = profile.r_grid[sel]
    U, V, dU, dV = profile.U[sel], profile.V[sel], profile.dU[sel], profile.dV[sel]
    v_sup = np.max(r ** N * np.abs(V - b * r ** (2.0 - N)))
    dv_sup = np.max(r ** (N + 1) * np.abs(dV + (N - 2) * b * r ** (1.0 - N)))
    regime = decay_regime(N, p)
    if regime == "fast":
        k0 = (N - 2) * p - N
        u_sup = np.max(r ** (N - 2 + k0) * np.abs(U - a * r ** (2.0 - N)))
        du_sup = np.max(r ** (N - 1 + k0) * np.abs(dU + (N - 2) * a * r ** (1.0 - N)))
    elif regime == "log":
        lr = np.log(r)
        u_sup = np.max(r ** (N - 2) * np.abs(U - a * lr * r ** (2.0 - N)))
        du_sup = np.max(r ** (N - 1) * np.abs(dU + (N - 2) * a * lr * r ** (1.0 - N)))
    else:
        m = (N - 2) * p - 2
        u_sup = np.max(r ** m * np.abs(U - a * r ** (-m)))
        du_sup = np.max(r ** (m + 1) * np.abs(dU + m * a * r ** (-m - 1)))
    return float(v_sup), float(dv_sup), float(u_sup), float(du_sup)


def verify_tail_bounds(profile: RadialProfile, window: tuple[float, float] | None = None,
                       stabilization_tol: float = 0.05) -> TailBoundReport:
    """Weighted remainder suprema of the tail laws, on a window and on its doubling.

    The window ``[lo, hi]`` defaults to the fit window; the grown window is
    ``[lo, 2 hi]``. A bounded remainder of the stated order keeps each supremum
    unchanged (within ``stabilization_tol``) when the window grows.
    """
    lo, hi = window or profile.r_fit_window
    if not np.isfinite(lo):
        lo, hi = profile.r_max / 4.0, profile.r_max / 2.0
    hi2 = min(2.0 * hi, profile.r_max)
    a, b = profile.tail_a, profile.tail_b
    first = _remainder_sups(profile, lo, hi, a, b)
    grown = _remainder_sups(profile, lo, hi2, a, b)
    return TailBoundReport((lo, hi), (lo, hi2), *first, *grown,
                           kappa0=(profile.N - 2) * profile.p - profile.N,
                           stabilization_tol=stabilization_tol)
