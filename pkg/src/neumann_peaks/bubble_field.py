"""Bubble family, the half-space Neumann correction phi0 and the projected bubble.

Coordinates: the model half-space is ``{y : y_N > 0}`` with boundary ``y_N = 0``
and outward normal ``-e_N``. The curvature-induced flux on the boundary is

    d phi0 / dn = -(N-2)/2 * gamma |z'|^2 / (1 + |z'|^2)^(N/2),

and phi0 is its harmonic extension that decays at infinity, written as a
single-layer potential with the full half-space distance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ground_state import RadialProfile
from .params import SystemParams
from .quadrature import QuadratureSpec, integrate_2d, sphere_area

PHI0_SPEC = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-15, max_subdivisions=20000)
FLUX_STEP = 2e-3


def _as_points(y, N: int) -> np.ndarray:
    pts = np.asarray(y, dtype=float)
    if pts.shape[-1] != N:
        raise ValueError(f"points must have trailing dimension {N}, got shape {pts.shape}")
    return pts


def scaling_identity_residual(params: SystemParams) -> float:
    """``N/(p+1) + N/(q+1) - (N-2)``, zero on the critical hyperbola."""
    return params.v_scaling + params.u_scaling - (params.N - 2)


# ------------------------------------------------------------------- bubbles

@dataclass(frozen=True, eq=False)
class Bubble:
    """``(lam^(N/(q+1)) U(lam|y-x|), lam^(N/(p+1)) V(lam|y-x|))``."""

    profile: RadialProfile
    lam: float
    center: np.ndarray

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("bubble scale must be positive")
        c = np.asarray(self.center, dtype=float).reshape(-1)
        if c.size != self.profile.N:
            raise ValueError(f"center must have {self.profile.N} coordinates")
        object.__setattr__(self, "center", c)

    @property
    def u_exponent(self) -> float:
        return self.profile.N / (self.profile.q + 1)

    @property
    def v_exponent(self) -> float:
        return self.profile.N / (self.profile.p + 1)


def bubble_eval(b: Bubble, y):
    """Evaluate the bubble at points ``y`` of shape ``(..., N)``."""
    pts = _as_points(y, b.profile.N)
    r = b.lam * np.linalg.norm(pts - b.center, axis=-1)
    flat = np.atleast_1d(r).ravel()
    u = b.lam ** b.u_exponent * b.profile.u(flat)
    v = b.lam ** b.v_exponent * b.profile.v(flat)
    if np.ndim(r) == 0:
        return float(u[0]), float(v[0])
    return u.reshape(r.shape), v.reshape(r.shape)


# --------------------------------------------------------------- correction

def boundary_flux(N: int, gamma: float, z) -> np.ndarray:
    """Prescribed outward normal derivative of phi0 at boundary points ``(z', 0)``."""
    r2 = np.sum(np.asarray(z, dtype=float)[..., : N - 1] ** 2, axis=-1)
    return -(N - 2) / 2.0 * gamma * r2 / (1.0 + r2) ** (N / 2.0)


def _phi0_unit(N: int, s: float, h: float, spec: QuadratureSpec):
    """phi0 for gamma = 1 at ``|y'| = s``, ``y_N = h``; returns (value, error).

    Polar coordinates centred at y' in the boundary: ``z' = y' + rho w`` with
    theta the angle between w and y'. The kernel
    ``rho^(N-2) / (rho^2 + h^2)^((N-2)/2)`` is bounded, so there is no singular
    point to resolve.
    """

    def f(rho, th):
        if h > 0:
            # (1 + (h/rho)^2)^(-(N-2)/2) stays finite for subnormal h and rho = 0
            with np.errstate(divide="ignore", over="ignore"):
                kern = (1.0 + (h / rho) ** 2) ** (-(N - 2) / 2.0)
        else:
            kern = 1.0
        c = np.cos(0.5 * th)
        t = (s - rho) ** 2 + 4.0 * s * rho * c * c  # |z'|^2 without cancellation
        return kern * t * (1.0 + t) ** (-N / 2.0) * np.sin(th) ** (N - 3)

    rho_breaks = {0.0, 1.0, 4.0, math.inf}
    th_breaks = {0.0, math.pi}
    if h > 0:
        rho_breaks.add(h)
    if s > 0:
        rho_breaks |= {max(s - 3.0, 0.0), max(s - 1.0, 0.0), s, s + 1.0, s + 3.0}
        for c in (1.0, 3.0, 10.0):
            if c < s:
                th_breaks.add(math.pi - c / s)
    res = integrate_2d(f, sorted(rho_breaks), sorted(th_breaks), spec, max(1.0, s, h), 1.0)
    c = -sphere_area(N - 3) / sphere_area(N - 1)
    return c * res.value, abs(c) * res.error


@dataclass(frozen=True, eq=False)
class CorrectionField:
    """Harmonic extension phi0 of the curvature flux, isotropic curvature ``gamma``.

    phi0 depends on y only through ``(|y'|, y_N)`` and is linear in gamma, so
    the unit-curvature values are memoized per ``(|y'|, y_N)``.
    """

    N: int
    gamma: float
    quadrature_tol: float = PHI0_SPEC.rel_tol
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.N < 3:
            raise ValueError("N must be at least 3")

    @property
    def spec(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.quadrature_tol, abs_tol=1e-15,
                              max_subdivisions=PHI0_SPEC.max_subdivisions)

    def unit_value(self, s: float, h: float) -> tuple[float, float]:
        key = (float(s), float(h))
        hit = self._cache.get(key)
        if hit is None:
            hit = _phi0_unit(self.N, key[0], key[1], self.spec)
            self._cache[key] = hit
        return hit

    def __call__(self, y):
        return phi0_eval(self, y)

    def with_gamma(self, gamma: float) -> "CorrectionField":
        """Same field at another curvature, sharing the unit-value cache."""
        return CorrectionField(self.N, gamma, self.quadrature_tol, self._cache)

    def flux(self, z) -> np.ndarray:
        return boundary_flux(self.N, self.gamma, z)


def phi0_eval(c: CorrectionField, y, return_error: bool = False):
    """phi0 at points ``y`` (shape ``(..., N)``) in the closed half-space."""
    pts = _as_points(y, c.N)
    if np.any(pts[..., -1] < 0):
        raise ValueError("phi0 is defined on the closed half-space y_N >= 0")
    s = np.linalg.norm(pts[..., : c.N - 1], axis=-1)
    h = pts[..., -1]
    flat_s, flat_h = np.atleast_1d(s).ravel(), np.atleast_1d(h).ravel()
    val = np.zeros(flat_s.shape)
    err = np.zeros(flat_s.shape)
    if c.gamma != 0.0:
        for i, (si, hi) in enumerate(zip(flat_s, flat_h)):
            v, e = c.unit_value(si, hi)
            val[i], err[i] = c.gamma * v, abs(c.gamma) * e
    if np.ndim(s) == 0:
        val, err = float(val[0]), float(err[0])
    else:
        val, err = val.reshape(s.shape), err.reshape(s.shape)
    return (val, err) if return_error else val


def flux_residual(c: CorrectionField, z, step: float = FLUX_STEP) -> np.ndarray:
    """``|FD outward normal derivative of phi0 - prescribed flux|`` at boundary points.

    Second-order one-sided difference ``(3 f(0) - 4 f(h) + f(2h)) / (2h)``
    for ``-d/dy_N``.
    """
    pts = np.atleast_2d(_as_points(z, c.N)).copy()
    pts[:, -1] = 0.0
    f = [phi0_eval(c, pts + k * step * np.eye(c.N)[-1]) for k in (0, 1, 2)]
    fd = (3.0 * f[0] - 4.0 * f[1] + f[2]) / (2.0 * step)
    return np.abs(fd - c.flux(pts))


def phi0_gradient(c: CorrectionField, y, step: float | None = None) -> np.ndarray:
    """Central-difference gradient at one interior point."""
    y = np.asarray(y, dtype=float)
    h = step or 1e-2 * max(1.0, float(np.linalg.norm(y)))
    if y[-1] < h:
        raise ValueError("point too close to the boundary for central differences")
    E = np.eye(c.N) * h
    return np.array([(phi0_eval(c, y + e) - phi0_eval(c, y - e)) / (2 * h) for e in E])


def phi0_hessian(c: CorrectionField, y, step: float | None = None) -> np.ndarray:
    """Central-difference Hessian at one interior point."""
    y = np.asarray(y, dtype=float)
    h = step or 1e-2 * max(1.0, float(np.linalg.norm(y)))
    if y[-1] < 2 * h:
        raise ValueError("point too close to the boundary for central differences")
    E = np.eye(c.N) * h
    f0 = phi0_eval(c, y)
    H = np.empty((c.N, c.N))
    for i in range(c.N):
        H[i, i] = (phi0_eval(c, y + E[i]) - 2 * f0 + phi0_eval(c, y - E[i])) / h ** 2
        for j in range(i):
            H[i, j] = H[j, i] = (
                phi0_eval(c, y + E[i] + E[j]) - phi0_eval(c, y + E[i] - E[j])
                - phi0_eval(c, y - E[i] + E[j]) + phi0_eval(c, y - E[i] - E[j])
            ) / (4 * h * h)
    return H


def discrete_laplacian(c: CorrectionField, y, step: float = 0.05) -> float:
    """Second-difference Laplacian of phi0 at an interior point."""
    y = np.asarray(y, dtype=float)
    if y[-1] <= step:
        raise ValueError("point too close to the boundary")
    E = np.eye(c.N) * step
    f0 = phi0_eval(c, y)
    return float(sum(phi0_eval(c, y + e) - 2 * f0 + phi0_eval(c, y - e) for e in E) / step ** 2)


# ------------------------------------------------------- projected bubble

def projected_bubble_approx(profile: RadialProfile, params: SystemParams, Lam: float,
                            x_j, y, correction: CorrectionField | None = None,
                            epsilon: float | None = None):
    """Leading-order model of the projected bubble centred at a boundary point.

    Returns the bubble at scale ``1/Lam`` minus ``eps Lam^(1-N/(q+1)) phi0((y-x_j)/Lam)``
    in the U-component and the same with exponent ``1-N/(p+1)`` in V.
    """
    N = params.N
    if not params.delta < Lam < 1.0 / params.delta:
        raise ValueError(f"Lambda={Lam} outside the window ({params.delta}, {1 / params.delta})")
    x_j = np.asarray(x_j, dtype=float)
    if x_j.shape != (N,) or x_j[-1] != 0.0:
        raise ValueError("x_j must be a boundary point (last coordinate 0)")
    eps = params.epsilon if epsilon is None else epsilon
    corr = correction or CorrectionField(N, params.gamma)
    U, V = bubble_eval(Bubble(profile, 1.0 / Lam, x_j), y)
    if eps == 0.0 or corr.gamma == 0.0:
        return U, V
    phi = phi0_eval(corr, (np.asarray(y, dtype=float) - x_j) / Lam)
    return (U - eps * Lam ** (1 - params.u_scaling) * phi,
            V - eps * Lam ** (1 - params.v_scaling) * phi)


def default_a2_samples(N: int, n_radii: int = 40, r_min: float = 0.05,
                       r_max: float = 100.0) -> np.ndarray:
    """Offsets ``y - x_j`` on rays at four elevations above the boundary."""
    radii = np.geomspace(r_min, r_max, n_radii)
    pts = []
    for ang in (0.0, math.pi / 6, math.pi / 3, math.pi / 2):
        d = np.zeros(N)
        d[0], d[-1] = math.cos(ang), math.sin(ang)
        pts.append(radii[:, None] * d[None, :])
    return np.concatenate(pts)


@dataclass(frozen=True)
class A2Report:
    epsilon: float
    m: int
    sup_numerator: float
    constant: float
    n_samples: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def verify_A2_bounds(profile: RadialProfile, params: SystemParams, Lam: float,
                     samples=None, correction: CorrectionField | None = None,
                     epsilon: float | None = None) -> A2Report:
    """Weighted size of the first-order boundary correction.

    ``sup |corr(y)| (1+|y-x_j|)^(N-3)`` over the sample offsets, and the same
    divided by ``eps |ln eps|^m`` (m = 1 for N = 5, else 0).
    """
    N = params.N
    eps = params.epsilon if epsilon is None else epsilon
    offs = default_a2_samples(N) if samples is None else np.atleast_2d(_as_points(samples, N))
    corr = correction or CorrectionField(N, params.gamma)
    m = params.m_log
    if corr.gamma == 0.0 or eps == 0.0:
        return A2Report(eps, m, 0.0, 0.0, len(offs))
    phi = phi0_eval(corr, offs / Lam)
    # the V-component correction differs only by a Lambda power; take the larger
    amp = eps * max(Lam ** (1 - params.u_scaling), Lam ** (1 - params.v_scaling))
    weight = (1.0 + np.linalg.norm(offs, axis=-1)) ** (N - 3)
    num = float(np.max(amp * np.abs(phi) * weight))
    norm = eps * abs(math.log(eps)) ** m if m else eps
    return A2Report(eps, m, num, num / norm, len(offs))


def a2_epsilon_sweep(profile: RadialProfile, params: SystemParams, Lam: float,
                     eps_values=(1e-2, 5e-3, 2.5e-3), growth_tol: float = 0.10, samples=None):
    """Run :func:`verify_A2_bounds` over several epsilons.

    Returns ``(reports, bounded)``; bounded means no reported constant exceeds
    the first one by more than ``growth_tol``.
    """
    corr = CorrectionField(params.N, params.gamma)
    reps = [verify_A2_bounds(profile, params, Lam, samples, corr, e) for e in eps_values]
    first = reps[0].constant
    bounded = all(np.isfinite(r.constant) and r.constant <= (1 + growth_tol) * first + 1e-300
                  for r in reps)
    return reps, bool(bounded)
