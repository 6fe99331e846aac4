"""Deterministic adaptive quadrature shared by the energy and correction computations.

Both integrators use the 7-point Gauss / 15-point Kronrod pair. Panels are
refined in batches chosen by a stable sort on their error estimates, and all
sums go through ``math.fsum``, so identical inputs give bit-identical outputs.
Semi-infinite and infinite intervals are handled by the map
``x = a + L t / (1 - t)`` on ``t in [0, 1)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

# 15-point Kronrod abscissae on [-1, 1]; even indices are the 7-point Gauss nodes
_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


class QuadResult(NamedTuple):
    value: float
    error: float


class QuadratureError(RuntimeError):
    """Tolerance not reached within the subdivision budget."""

    def __init__(self, message: str, value: float = math.nan, error: float = math.inf):
        super().__init__(f"{message} (value={value:.12g}, achieved error={error:.3e})")
        self.value = value
        self.error = error


class TailDivergenceError(QuadratureError):
    """The weighted integrand decays too slowly to be integrable at infinity."""


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-15
    max_subdivisions: int = 4000
    truncation_radius: float = 400.0
    tail: bool = True

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.truncation_radius <= 0:
            raise ValueError("truncation_radius must be positive")

    def tightened(self, factor: float = 0.5) -> "QuadratureSpec":
        return QuadratureSpec(self.rel_tol * factor, self.abs_tol * factor,
                              self.max_subdivisions * 2, self.truncation_radius, self.tail)


DEFAULT_SPEC = QuadratureSpec()


def sphere_area(m: int) -> float:
    """Surface measure of the unit sphere S^m in R^(m+1)."""
    return 2.0 * math.pi ** ((m + 1) / 2) / math.gamma((m + 1) / 2)


# --------------------------------------------------------------------------- maps

class _Axis:
    """One integration axis split at breakpoints, each piece finite or mapped."""

    def __init__(self, breaks: Sequence[float], scale: float = 1.0):
        pts = sorted(set(float(b) for b in breaks))
        if len(pts) < 2:
            raise ValueError("need at least two distinct breakpoints")
        self.pieces = []
        for lo, hi in zip(pts[:-1], pts[1:]):
            if math.isinf(lo) and math.isinf(hi):
                raise ValueError("split (-inf, inf) with a finite breakpoint")
            if math.isinf(hi):
                self.pieces.append(("up", lo, scale))
            elif math.isinf(lo):
                self.pieces.append(("down", hi, scale))
            else:
                self.pieces.append(("finite", lo, hi))

    def initial_panels(self):
        """Panels in parameter space as (piece index, lo, hi)."""
        out = []
        for i, piece in enumerate(self.pieces):
            if piece[0] == "finite":
                out.append((i, piece[1], piece[2]))
            else:
                out.append((i, 0.0, 1.0))
        return out

    def to_x(self, piece_idx: np.ndarray, t: np.ndarray):
        """Map parameter values to x and return (x, jacobian)."""
        x = np.empty_like(t)
        jac = np.empty_like(t)
        for i, piece in enumerate(self.pieces):
            sel = piece_idx == i
            if not np.any(sel):
                continue
            tt = t[sel]
            if piece[0] == "finite":
                x[sel] = tt
                jac[sel] = 1.0
            else:
                _, anchor, scale = piece
                u = 1.0 - tt
                step = scale * tt / u
                x[sel] = anchor + step if piece[0] == "up" else anchor - step
                jac[sel] = scale / (u * u)
        return x, jac


def _select_for_split(err: np.ndarray, total_err: float, tol: float) -> np.ndarray:
    order = np.argsort(-err, kind="stable")
    excess = total_err - 0.5 * tol
    cum = np.cumsum(err[order])
    n = int(np.searchsorted(cum, excess)) + 1
    n = max(1, min(n, len(order)))
    return np.sort(order[:n])


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breaks: Sequence[float],
    spec: QuadratureSpec = DEFAULT_SPEC,
    scale: float = 1.0,
) -> QuadResult:
    """Adaptive 1-D quadrature of a vectorized ``f`` over the union of ``breaks`` pieces."""
    axis = _Axis(breaks, scale)
    panels = np.array([(i, lo, hi) for i, lo, hi in axis.initial_panels()], dtype=float)
    piece = panels[:, 0].astype(int)
    lo, hi = panels[:, 1], panels[:, 2]

    def evaluate(piece, lo, hi):
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        t = mid[:, None] + half[:, None] * _XK[None, :]
        pidx = np.broadcast_to(piece[:, None], t.shape)
        x, jac = axis.to_x(pidx.ravel(), t.ravel())
        fx = np.asarray(f(x), dtype=float).reshape(t.shape) * jac.reshape(t.shape)
        if not np.all(np.isfinite(fx)):
            raise QuadratureError("non-finite integrand value")
        k = half * (fx @ _WK)
        g = half * (fx @ _WG)
        return k, np.abs(k - g)

    vals, errs = evaluate(piece, lo, hi)
    done_piece, done_lo, done_hi = piece, lo, hi
    while True:
        total = math.fsum(vals)
        total_err = float(np.sum(errs))
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= tol:
            return QuadResult(total, total_err)
        if len(vals) >= spec.max_subdivisions:
            raise QuadratureError("1-D quadrature did not converge", total, total_err)
        split = _select_for_split(errs, total_err, tol)
        keep = np.ones(len(vals), dtype=bool)
        keep[split] = False
        sp, sl, sh = done_piece[split], done_lo[split], done_hi[split]
        sm = 0.5 * (sl + sh)
        np_piece = np.concatenate([sp, sp])
        np_lo = np.concatenate([sl, sm])
        np_hi = np.concatenate([sm, sh])
        nv, ne = evaluate(np_piece, np_lo, np_hi)
        vals = np.concatenate([vals[keep], nv])
        errs = np.concatenate([errs[keep], ne])
        done_piece = np.concatenate([done_piece[keep], np_piece])
        done_lo = np.concatenate([done_lo[keep], np_lo])
        done_hi = np.concatenate([done_hi[keep], np_hi])


def integrate_2d(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    x_breaks: Sequence[float],
    y_breaks: Sequence[float],
    spec: QuadratureSpec = DEFAULT_SPEC,
    x_scale: float = 1.0,
    y_scale: float = 1.0,
) -> QuadResult:
    """Adaptive tensor-product cubature over the rectangles spanned by the breakpoints.

    Each rectangle is bisected along the axis whose Gauss/Kronrod discrepancy
    is larger.
    """
    ax, ay = _Axis(x_breaks, x_scale), _Axis(y_breaks, y_scale)
    rects = [(ix, xl, xh, iy, yl, yh)
             for ix, xl, xh in ax.initial_panels()
             for iy, yl, yh in ay.initial_panels()]
    R = np.array(rects, dtype=float)

    def evaluate(R):
        xm, xh_ = 0.5 * (R[:, 1] + R[:, 2]), 0.5 * (R[:, 2] - R[:, 1])
        ym, yh_ = 0.5 * (R[:, 4] + R[:, 5]), 0.5 * (R[:, 5] - R[:, 4])
        tx = xm[:, None] + xh_[:, None] * _XK[None, :]
        ty = ym[:, None] + yh_[:, None] * _XK[None, :]
        px = np.broadcast_to(R[:, 0:1].astype(int), tx.shape)
        py = np.broadcast_to(R[:, 3:4].astype(int), ty.shape)
        x, jx = ax.to_x(px.ravel(), tx.ravel())
        y, jy = ay.to_x(py.ravel(), ty.ravel())
        n = len(R)
        x, jx = x.reshape(n, 15), jx.reshape(n, 15)
        y, jy = y.reshape(n, 15), jy.reshape(n, 15)
        X = np.broadcast_to(x[:, :, None], (n, 15, 15))
        Y = np.broadcast_to(y[:, None, :], (n, 15, 15))
        fv = np.asarray(f(X, Y), dtype=float) * jx[:, :, None] * jy[:, None, :]
        if not np.all(np.isfinite(fv)):
            raise QuadratureError("non-finite integrand value")
        area = xh_ * yh_
        kk = area * np.einsum("nij,i,j->n", fv, _WK, _WK)
        gk = area * np.einsum("nij,i,j->n", fv, _WG, _WK)
        kg = area * np.einsum("nij,i,j->n", fv, _WK, _WG)
        ex, ey = np.abs(kk - gk), np.abs(kk - kg)
        return kk, ex, ey

    vals, ex, ey = evaluate(R)
    while True:
        errs = ex + ey
        total = math.fsum(vals)
        total_err = float(np.sum(errs))
        tol = max(spec.abs_tol, spec.rel_tol * abs(total))
        if total_err <= tol:
            return QuadResult(total, total_err)
        if len(vals) >= spec.max_subdivisions:
            raise QuadratureError("2-D cubature did not converge", total, total_err)
        split = _select_for_split(errs, total_err, tol)
        keep = np.ones(len(vals), dtype=bool)
        keep[split] = False
        S = R[split]
        along_x = ex[split] >= ey[split]
        A, B = S.copy(), S.copy()
        xmid = 0.5 * (S[:, 1] + S[:, 2])
        ymid = 0.5 * (S[:, 4] + S[:, 5])
        A[along_x, 2] = xmid[along_x]
        B[along_x, 1] = xmid[along_x]
        A[~along_x, 5] = ymid[~along_x]
        B[~along_x, 4] = ymid[~along_x]
        new = np.concatenate([A, B])
        nv, nex, ney = evaluate(new)
        R = np.concatenate([R[keep], new])
        vals = np.concatenate([vals[keep], nv])
        ex = np.concatenate([ex[keep], nex])
        ey = np.concatenate([ey[keep], ney])


# ------------------------------------------------------------------ radial integrals

def fit_power_tail(f: Callable[[np.ndarray], np.ndarray], radius: float,
                   n_points: int = 9) -> tuple[float, float]:
    """Fit ``f(r) ~ C r^-m`` on ``[radius/2, radius]``; returns ``(C, m)``.

    ``C = 0`` when f has already underflowed.
    """
    r = np.geomspace(0.5 * radius, radius, n_points)
    fr = np.asarray(f(r), dtype=float)
    if fr[-1] == 0.0:
        return 0.0, math.inf
    if np.any(fr == 0.0) or np.any(np.sign(fr) != np.sign(fr[-1])):
        raise QuadratureError("integrand changes sign or vanishes inside the tail window")
    slope = np.polyfit(np.log(r), np.log(np.abs(fr)), 1)[0]
    m = -float(slope)
    return float(fr[-1] * radius ** m), m


def power_tail(C: float, m: float, radius: float, dim: int) -> float:
    """Closed form of ``int_radius^inf C r^(-m) r^(dim-1) dr``."""
    if C == 0.0:
        return 0.0
    if m <= dim:
        raise TailDivergenceError(
            f"tail decay r^-{m:.4f} is not integrable against r^{dim - 1}")
    return C * radius ** (dim - m) / (m - dim)


def radial_integral(
    f: Callable[[np.ndarray], np.ndarray],
    dim: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
    breaks: Sequence[float] = (),
    tail_law: tuple[float, float] | None = None,
) -> QuadResult:
    """``int_0^inf f(r) r^(dim-1) dr`` by truncation plus an analytic power-law tail.

    Multiply by ``sphere_area(dim - 1)`` for the full-space integral of the
    radial function, or by half of it for a half-space centred on the boundary.
    ``tail_law=(C, m)`` overrides the fitted tail ``f ~ C r^-m``.
    """
    R = spec.truncation_radius
    if tail_law is None:
        C, m = fit_power_tail(f, R)
    else:
        C, m = tail_law
    if C != 0.0 and m <= dim + 1e-6:
        raise TailDivergenceError(
            f"tail decay r^-{m:.4f} is not integrable against r^{dim - 1}")
    pts = [0.0, R] + [b for b in breaks if 0.0 < b < R]
    body = integrate(lambda r: f(r) * r ** (dim - 1), pts, spec)
    if not spec.tail:
        return body
    tail = power_tail(C, m, R, dim)
    if tail_law is None and C != 0.0:
        # spread between half-window fits bounds the tail model error
        C2, m2 = fit_power_tail(f, 0.75 * R, 5)
        alt = C2 * R ** (dim - m2) / (m2 - dim) if m2 > dim else tail
        tail_err = abs(alt - tail)
    else:
        tail_err = 0.0
    return QuadResult(body.value + tail, body.error + tail_err)


def bipolar_halfspace_integral(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    d: float,
    N: int,
    spec: QuadratureSpec = DEFAULT_SPEC,
    core: float = 1.0,
) -> QuadResult:
    """Half-space integral of ``f(|y|, |y - d e1|)`` for two centres on the boundary.

    The integrand is even in ``y_N``, so the half-space value is half the
    full-space one. The full-space integral is reduced to the axial coordinate
    ``s`` and the transverse radius ``t`` with weight ``|S^(N-2)| t^(N-2)``.
    ``core`` is the length scale of the integrand near each centre.
    """
    if d < 0:
        raise ValueError("separation must be nonnegative")
    s_breaks = {-math.inf, -core, 0.0, core, math.inf}
    t_breaks = {0.0, core, math.inf}
    if d > 0:
        s_breaks |= {d - core, d, d + core, 0.5 * d}
        if d > 4 * core:
            t_breaks.add(0.5 * d)
    s_breaks = sorted(b for b in s_breaks if math.isinf(b) or -core <= b <= d + core)
    s_breaks = sorted(set(s_breaks))
    scale = max(core, d)

    def integrand(s, t):
        r1 = np.hypot(s, t)
        r2 = np.hypot(s - d, t)
        return t ** (N - 2) * f(r1, r2)

    res = integrate_2d(integrand, s_breaks, sorted(t_breaks), spec, scale, scale)
    c = 0.5 * sphere_area(N - 2)
    return QuadResult(c * res.value, c * res.error)
