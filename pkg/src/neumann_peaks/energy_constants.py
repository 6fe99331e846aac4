"""Energy-expansion constants of a single boundary bubble and their assembly.

All integrals are over the half-space with the bubble centred on the
boundary, so radial integrals carry half a sphere, and boundary integrals
carry the sphere of one dimension lower.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import least_squares

from .ground_state import RadialProfile
from .params import SystemParams
from .quadrature import (QuadratureSpec, TailDivergenceError, bipolar_halfspace_integral,
                         integrate, sphere_area)

CONSTANTS_SPEC = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-14, max_subdivisions=4000)
INTERACTION_SPEC = QuadratureSpec(rel_tol=1e-7, abs_tol=1e-300, max_subdivisions=20000)


class EnergyConstantError(RuntimeError):
    pass


@dataclass(frozen=True)
class Estimate:
    value: float
    error: float

    def __iter__(self):
        return iter((self.value, self.error))


def _tail_exponents(profile: RadialProfile) -> tuple[float, float]:
    """Decay exponents of U and V (U's depends on the regime)."""
    N, p = profile.N, profile.p
    mv = N - 2.0
    mu = N - 2.0 if profile.regime != "slow" else (N - 2.0) * p - 2.0
    return mu, mv


def _profile_integral(profile: RadialProfile, f, dim: int, amp: float, m: float,
                      spec: QuadratureSpec) -> Estimate:
    """``int_0^inf f(r) r^(dim-1) dr`` with ``f ~ amp r^-m`` at infinity.

    Beyond the grid the profile follows its fitted tail expansion. The part
    of the tail contributed by the fitted corrections, beyond the leading
    power law, is counted in full as model error.
    """
    R = profile.r_trust
    if m <= dim:
        raise TailDivergenceError(f"r^-{m:.4f} is not integrable against r^{dim - 1}")
    g = lambda r: f(r) * r ** (dim - 1)  # noqa: E731
    body = integrate(g, [0.0, 1.0, 5.0, 25.0, R], spec)  # R is the switch to the tail
    tail = integrate(g, [R, math.inf], spec, scale=R)
    lead = amp * R ** (dim - m) / (m - dim)
    return Estimate(body.value + tail.value, body.error + tail.error + abs(tail.value - lead))


def compute_A0_B0(profile: RadialProfile, params: SystemParams,
                  spec: QuadratureSpec = CONSTANTS_SPEC) -> tuple[Estimate, Estimate]:
    """``1/2 |S^(N-1)| int V^(p+1) r^(N-1) dr`` and the U^(q+1) analogue."""
    N, p, q = params.N, params.p, params.q
    mu, mv = _tail_exponents(profile)
    a, b = profile.tail_a, profile.tail_b
    half = 0.5 * sphere_area(N - 1)
    iv = _profile_integral(profile, lambda r: profile.v(r) ** (p + 1), N, b ** (p + 1),
                           mv * (p + 1), spec)
    iu = _profile_integral(profile, lambda r: profile.u(r) ** (q + 1), N, a ** (q + 1),
                           mu * (q + 1), spec)
    return Estimate(half * iv.value, half * iv.error), Estimate(half * iu.value, half * iu.error)


def compute_A1_B1(profile: RadialProfile, params: SystemParams,
                  spec: QuadratureSpec = CONSTANTS_SPEC) -> tuple[Estimate, Estimate]:
    """``1/2 |S^(N-2)| int V^(p+1) r^N dr`` and the U^(q+1) analogue."""
    N, p, q = params.N, params.p, params.q
    if (N - 2) * (p + 1) <= N + 1:
        raise EnergyConstantError("|y'|^2 V^(p+1) is not integrable on the boundary for this p")
    mu, mv = _tail_exponents(profile)
    a, b = profile.tail_a, profile.tail_b
    half = 0.5 * sphere_area(N - 2)
    iv = _profile_integral(profile, lambda r: profile.v(r) ** (p + 1), N + 1, b ** (p + 1),
                           mv * (p + 1), spec)
    iu = _profile_integral(profile, lambda r: profile.u(r) ** (q + 1), N + 1, a ** (q + 1),
                           mu * (q + 1), spec)
    return Estimate(half * iv.value, half * iv.error), Estimate(half * iu.value, half * iu.error)


def compute_A3_B3(profile: RadialProfile, params: SystemParams,
                  spec: QuadratureSpec = CONSTANTS_SPEC) -> tuple[Estimate, Estimate]:
    """``(N-2)/2 |S^(N-2)| int U r^N (1+r^2)^(-N/2) dr`` and the V analogue."""
    N = params.N
    if profile.regime != "fast":
        raise EnergyConstantError("boundary constants need the fast-decay regime")
    a, b = profile.tail_a, profile.tail_b
    c = 0.5 * (N - 2) * sphere_area(N - 2)

    def w(r):
        return r * (1.0 + r * r) ** (-N / 2.0)

    # integrand ~ amp r^(2-N) r^(1-N) times r^(N-1); written against r^(N-1)
    m = 2.0 * N - 3.0
    iu = _profile_integral(profile, lambda r: profile.u(r) * w(r), N, a, m, spec)
    iv = _profile_integral(profile, lambda r: profile.v(r) * w(r), N, b, m, spec)
    return Estimate(c * iu.value, c * iu.error), Estimate(c * iv.value, c * iv.error)


def compute_A4_B4(profile: RadialProfile, params: SystemParams,
                  spec: QuadratureSpec = CONSTANTS_SPEC) -> tuple[Estimate, Estimate]:
    """``b * 1/2 |S^(N-1)| int V^p r^(N-1) dr`` and ``a`` times the U^q analogue."""
    N, p, q = params.N, params.p, params.q
    if profile.regime != "fast":
        raise EnergyConstantError("interaction constants need the fast-decay regime")
    a, b = profile.tail_a, profile.tail_b
    half = 0.5 * sphere_area(N - 1)
    iv = _profile_integral(profile, lambda r: profile.v(r) ** p, N, b ** p, (N - 2.0) * p, spec)
    iu = _profile_integral(profile, lambda r: profile.u(r) ** q, N, a ** q, (N - 2.0) * q, spec)
    # the tail constants carry the fit's own uncertainty; the flux identity
    # int V^p r^(N-1) = (N-2) a bounds it
    fit_err_a = abs(iv.value / (N - 2) - a)
    fit_err_b = abs(iu.value / (N - 2) - b)
    A4 = Estimate(b * half * iv.value, half * (b * iv.error + fit_err_b * iv.value))
    B4 = Estimate(a * half * iu.value, half * (a * iu.error + fit_err_a * iu.value))
    return A4, B4


def interaction_integral(profile: RadialProfile, params: SystemParams, d: float,
                         spec: QuadratureSpec = INTERACTION_SPEC) -> tuple[Estimate, Estimate]:
    """Half-space integrals of ``V^p(y) V(y - d e1)`` and ``U^q(y) U(y - d e1)``."""
    if d < 0:
        raise ValueError("separation must be nonnegative")
    q = params.q
    rv = interaction_integral_v(profile, params, d, spec)
    ru = bipolar_halfspace_integral(lambda r1, r2: profile.u(r1) ** q * profile.u(r2),
                                    d, params.N, spec)
    return rv, Estimate(*ru)


def interaction_integral_v(profile: RadialProfile, params: SystemParams, d: float,
                           spec: QuadratureSpec = INTERACTION_SPEC) -> Estimate:
    """V-part of :func:`interaction_integral` alone."""
    p = params.p
    res = bipolar_halfspace_integral(lambda r1, r2: profile.v(r1) ** p * profile.v(r2),
                                     d, params.N, spec)
    return Estimate(*res)


@dataclass(frozen=True)
class InteractionSweep:
    """Two-bubble V-integral ``I(d)`` over separations.

    ``secant_slope`` is the straight log-log regression. ``leading_exponent``
    and ``second_exponent`` come from fitting ``C d^-s1 (1 + c d^-(s2-s1))``,
    which separates the leading decay from the first correction.
    """

    d: tuple[float, ...]
    values: tuple[float, ...]
    errors: tuple[float, ...]
    scaled: tuple[float, ...]
    secant_slope: float
    leading_exponent: float
    second_exponent: float
    fit_residual: float
    A4: float

    @property
    def relative_gap(self) -> float:
        """``|d^(N-2) I(d) / A4 - 1|`` at the largest separation."""
        return abs(self.scaled[-1] / self.A4 - 1.0)

    def to_dict(self) -> dict:
        return dict(asdict(self), relative_gap=self.relative_gap)


def fit_two_power(d, values, s1_guess: float, gap_guess: float = 2.0):
    """Least-squares fit of ``C d^-s1 (1 + c d^-g)``; returns ``(C, s1, s1 + g, max rel. residual)``."""
    d = np.asarray(d, dtype=float)
    vals = np.asarray(values, dtype=float)

    def resid(th):
        lc, s1, c, g = th
        return np.exp(lc) * d ** -s1 * (1.0 + c * d ** -g) / vals - 1.0

    th0 = [math.log(vals[-1] * d[-1] ** s1_guess), s1_guess, 0.0, gap_guess]
    sol = least_squares(resid, th0, x_scale="jac", xtol=1e-14, ftol=1e-14, gtol=1e-14)
    lc, s1, _, g = sol.x
    return math.exp(lc), float(s1), float(s1 + g), float(np.max(np.abs(sol.fun)))


def interaction_sweep(profile: RadialProfile, params: SystemParams,
                      d_values=tuple(np.geomspace(20.0, 80.0, 9)), A4: float | None = None,
                      spec: QuadratureSpec = INTERACTION_SPEC) -> InteractionSweep:
    """Evaluate ``I(d)`` over ``d_values`` and fit its decay."""
    d = np.asarray(d_values, dtype=float)
    if d.size < 5:
        raise ValueError("need at least five separations for the two-term fit")
    res = [interaction_integral_v(profile, params, float(x), spec) for x in d]
    vals = np.array([r.value for r in res])
    errs = np.array([r.error for r in res])
    secant = float(np.polyfit(np.log(d), np.log(vals), 1)[0])
    _, s1, s2, resid = fit_two_power(d, vals, params.N - 2.0)
    if A4 is None:
        A4 = compute_A4_B4(profile, params)[0].value
    scaled = vals * d ** (params.N - 2)
    return InteractionSweep(tuple(map(float, d)), tuple(map(float, vals)), tuple(map(float, errs)),
                            tuple(map(float, scaled)), secant, -s1, s2, resid, float(A4))


# -------------------------------------------------------------------- assembly

@dataclass(frozen=True)
class EnergyConstants:
    A0: float
    A1: float
    A3: float
    A4: float
    B0: float
    B1: float
    B3: float
    B4: float
    Q0: float
    Q1: float
    Q2: float
    Q3: float
    Q4: float
    errors: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    Q1_termwise: float = math.nan

    def error(self, name: str) -> float:
        return self.errors.get(name, math.nan)

    def symmetry_gaps(self) -> dict:
        """Relative differences ``|A_i - B_i| / |A_i|``."""
        return {f"{i}": abs(getattr(self, f"A{i}") - getattr(self, f"B{i}")) / abs(getattr(self, f"A{i}"))
                for i in (0, 1, 3, 4)}

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self, path=None, **extra) -> str:
        doc = dict(self.to_dict(), **extra)
        text = json.dumps(doc, indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text)
        return text


def assemble_Q(constants: dict, params: SystemParams, Q3: float,
               provenance: dict | None = None) -> EnergyConstants:
    """Combine the eight constants into Q0..Q4.

    ``constants`` maps ``"A0"``, ... ``"B4"`` to :class:`Estimate` or to
    ``(value, error)`` pairs. Errors combine linearly.
    """
    p, q = params.p, params.q
    vals, errs = {}, {}
    for name in ("A0", "A1", "A3", "A4", "B0", "B1", "B3", "B4"):
        item = constants[name]
        v, e = (item.value, item.error) if isinstance(item, Estimate) else tuple(item)
        vals[name], errs[name] = float(v), float(e)
        if not v > 0:
            raise EnergyConstantError(f"{name} = {v} is not positive")
    A0, A1, A3, A4 = (vals[k] for k in ("A0", "A1", "A3", "A4"))
    B0, B1, B3, B4 = (vals[k] for k in ("B0", "B1", "B3", "B4"))
    cp, cq = 1.0 / (p + 1), 1.0 / (q + 1)
    Q0 = (A0 + B0) / 2 - A0 * cp - B0 * cq
    Q1 = (A3 + B3) / 2 + (A1 + B1) / 2 - A1 * cp - B1 * cq
    Q2 = (A4 + B4) / 2
    Q4 = Q2 * Q3
    # coefficient of -gamma Lambda eps from the gradient term minus the two
    # power terms, each expanded separately
    D1, D3 = (A1 + B1) / 2, (A3 + B3) / 2
    Q1_termwise = -((D3 - D1) - (A3 - A1 * cp) - (B3 - B1 * cq))
    errs["Q0"] = abs(0.5 - cp) * errs["A0"] + abs(0.5 - cq) * errs["B0"]
    errs["Q1"] = (0.5 * (errs["A3"] + errs["B3"]) + abs(0.5 - cp) * errs["A1"]
                  + abs(0.5 - cq) * errs["B1"])
    errs["Q2"] = 0.5 * (errs["A4"] + errs["B4"])
    errs["Q3"] = 0.0
    errs["Q4"] = errs["Q2"] * Q3
    for name, v in (("Q0", Q0), ("Q1", Q1), ("Q2", Q2), ("Q4", Q4)):
        if not v > 0:
            raise EnergyConstantError(f"{name} = {v} is not positive")
    return EnergyConstants(A0, A1, A3, A4, B0, B1, B3, B4, Q0, Q1, Q2, Q3, Q4,
                           errs, dict(provenance or {}), Q1_termwise)


def compute_energy_constants(profile: RadialProfile, params: SystemParams,
                             Q3: float | None = None,
                             spec: QuadratureSpec = CONSTANTS_SPEC) -> EnergyConstants:
    """All eight constants from one profile, assembled with the lattice constant."""
    from .lattice import Q3_constant

    if Q3 is None:
        Q3 = Q3_constant(params.N)
    A0, B0 = compute_A0_B0(profile, params, spec)
    A1, B1 = compute_A1_B1(profile, params, spec)
    A3, B3 = compute_A3_B3(profile, params, spec)
    A4, B4 = compute_A4_B4(profile, params, spec)
    prov = {"rel_tol": spec.rel_tol, "abs_tol": spec.abs_tol,
            "max_subdivisions": spec.max_subdivisions, "r_max": profile.r_max,
            "tail_a": profile.tail_a, "tail_b": profile.tail_b, "beta": profile.beta}
    return assemble_Q({"A0": A0, "A1": A1, "A3": A3, "A4": A4,
                       "B0": B0, "B1": B1, "B3": B3, "B4": B4}, params, Q3, prov)
