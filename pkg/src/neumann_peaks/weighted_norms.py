"""Peak-adapted weighted sup norms on sample sets and numeric harnesses for
the basic convolution and weight inequalities."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import PeakConfig
from .params import SystemParams
from .quadrature import QuadratureSpec, integrate_2d, sphere_area

B3_SPEC = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-300, max_subdivisions=20000)


# -------------------------------------------------------------------- samples

def generate_samples(config: PeakConfig, seed: int = 0, shell_radii=None,
                     n_directions: int = 8, n_background: int = 200) -> np.ndarray:
    """Deterministic sample points for sup norms.

    Shells of random directions around every peak, the arc midpoints between
    neighbouring peaks, and a uniform background cloud in the bounding box.
    """
    rng = np.random.default_rng(seed)
    N = config.N
    peaks = config.points
    if shell_radii is None:
        shell_radii = np.concatenate([[0.0], np.geomspace(0.25, 0.5 / config.epsilon, 12)])
    pts = []
    for x in peaks:
        for r in shell_radii:
            if r == 0.0:
                pts.append(x[None, :])
                continue
            d = rng.normal(size=(n_directions, N))
            d /= np.linalg.norm(d, axis=1, keepdims=True)
            pts.append(x + r * d)
    if config.k > 1:
        ang = 2.0 * np.pi * (np.arange(config.k) + 0.5) / config.k
        mid = np.zeros((config.k, N))
        mid[:, 0] = np.cos(ang) / config.epsilon
        mid[:, 1] = np.sin(ang) / config.epsilon
        pts.append(mid)
    R = 1.5 / config.epsilon
    pts.append(rng.uniform(-R, R, size=(n_background, N)))
    return np.concatenate(pts)


# ---------------------------------------------------------------------- norms

def peak_weight(points, config: PeakConfig, exponent: float) -> np.ndarray:
    """``sum_j (1 + |y - x_j|)^-exponent`` at each sample point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    dist = np.linalg.norm(pts[:, None, :] - config.points[None, :, :], axis=-1)
    return np.sum((1.0 + dist) ** -exponent, axis=1)


@dataclass(frozen=True)
class SampledField:
    points: np.ndarray
    values: np.ndarray
    config: PeakConfig
    component: str  # "u" or "v"

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if pts.shape[0] == 0:
            raise ValueError("sample set is empty")
        if pts.shape != (vals.size, self.config.N):
            raise ValueError("points and values do not match")
        if self.component not in ("u", "v"):
            raise ValueError("component must be 'u' or 'v'")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", vals)

    def scaled(self, c: float) -> "SampledField":
        return SampledField(self.points, c * self.values, self.config, self.component)


def norm_exponent(params: SystemParams, component: str, double: bool = False) -> float:
    """``N/(q+1) + tau`` for u, ``N/(p+1) + tau`` for v; the ** norms add 2."""
    base = params.u_scaling if component == "u" else params.v_scaling
    return base + params.tau + (2.0 if double else 0.0)


def star_norm(field: SampledField, params: SystemParams, double: bool = False) -> float:
    """Sampled ``||.||_*`` (or ``||.||_**`` with ``double=True``)."""
    w = peak_weight(field.points, field.config, norm_exponent(params, field.component, double))
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("non-finite weight")
    return float(np.max(np.abs(field.values) / w))


def pair_norm(u: SampledField, v: SampledField, params: SystemParams,
              double: bool = False) -> float:
    """``||(u, v)|| = ||u||_{.,1} + ||v||_{.,2}``."""
    return star_norm(u, params, double) + star_norm(v, params, double)


# ----------------------------------------------------------------- harnesses

def check_B1(config: PeakConfig, alpha: float, samples=None, seed: int = 0) -> float:
    """``max_y sum_j (1+|y-x_j|)^-alpha / (1 + sum_{j>=2} |x_1-x_j|^-alpha)``."""
    from .lattice import lattice_sum

    if not alpha > 0:
        raise ValueError("alpha must be positive")
    pts = generate_samples(config, seed) if samples is None else samples
    denom = 1.0 + lattice_sum(config, alpha)
    return float(np.max(peak_weight(pts, config, alpha)) / denom)


def _b2_ratio(y, alpha, beta, sigma, xi, xj):
    y = np.atleast_2d(np.asarray(y, dtype=float))
    di = np.linalg.norm(y - xi, axis=1)
    dj = np.linalg.norm(y - xj, axis=1)
    dij = float(np.linalg.norm(np.asarray(xi) - np.asarray(xj)))
    lhs = (1 + di) ** -alpha * (1 + dj) ** -beta
    e = alpha + beta - sigma
    rhs = dij ** -sigma * ((1 + di) ** -e + (1 + dj) ** -e)
    return lhs / rhs


def b2_samples(xi, xj, n_line: int = 401, n_random: int = 400, seed: int = 0) -> np.ndarray:
    """Points on the segment, its extension, and a cloud around both centres."""
    xi, xj = np.asarray(xi, dtype=float), np.asarray(xj, dtype=float)
    t = np.linspace(-1.0, 2.0, n_line)
    line = xi + t[:, None] * (xj - xi)
    rng = np.random.default_rng(seed)
    dij = np.linalg.norm(xj - xi)
    cloud = 0.5 * (xi + xj) + rng.normal(scale=dij, size=(n_random, xi.size))
    return np.concatenate([line, cloud, xi[None], xj[None]])


def check_B2(alpha: float, beta: float, sigma: float, x_i, x_j, samples=None,
             seed: int = 0) -> float:
    """Largest ratio LHS/RHS of the two-centre weight inequality over the samples."""
    if not (alpha > 1 and beta > 1):
        raise ValueError("alpha and beta must exceed 1")
    if not 0 <= sigma <= min(alpha, beta):
        raise ValueError("sigma must lie in [0, min(alpha, beta)]")
    x_i, x_j = np.asarray(x_i, dtype=float), np.asarray(x_j, dtype=float)
    if np.allclose(x_i, x_j):
        raise ValueError("centres must differ")
    pts = b2_samples(x_i, x_j, seed=seed) if samples is None else samples
    return float(np.max(_b2_ratio(pts, alpha, beta, sigma, x_i, x_j)))


def b2_distance_sweep(alpha, beta, sigma, distances=(4, 8, 16, 32, 64, 128, 256), N: int = 3,
                      seed: int = 0):
    """B2 constants for centres ``0`` and ``d e1`` over a range of separations."""
    out = []
    for d in distances:
        xi = np.zeros(N)
        xj = np.zeros(N)
        xj[0] = d
        out.append(check_B2(alpha, beta, sigma, xi, xj, seed=seed))
    return np.array(out)


def convolution_B3(N: int, sigma: float, y: float, spec: QuadratureSpec = B3_SPEC):
    """``int_{R^N} |y - z|^(2-N) (1+|z|)^(-2-sigma) dz`` at ``|y| = y``.

    The second factor is radial, so with ``z = rho w`` and theta the angle
    between w and y the integral is two-dimensional. Returns (value, error).
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    Y = float(abs(y))

    def f(r, th):
        d2 = (r - Y) ** 2 + 4.0 * Y * r * np.sin(0.5 * th) ** 2 if Y > 0 else r * r
        return r ** (N - 1) * (1 + r) ** (-2 - sigma) * d2 ** ((2 - N) / 2) * np.sin(th) ** (N - 2)

    r_breaks = {0.0, 1.0, math.inf}
    t_breaks = {0.0, math.pi}
    if Y > 0:
        r_breaks |= {0.5 * Y, Y, 2.0 * Y}
        for c in (1.0, 10.0):
            if c < Y:
                t_breaks.add(c / Y)
    res = integrate_2d(f, sorted(r_breaks), sorted(t_breaks), spec, max(1.0, Y), 1.0)
    c = sphere_area(N - 2)
    return c * res.value, c * res.error


@dataclass(frozen=True)
class B3Report:
    N: int
    sigma: float
    y: tuple[float, ...]
    values: tuple[float, ...]
    weighted: tuple[float, ...]
    sup_weighted: float
    fitted_exponent: float
    expected_exponent: float

    @property
    def exponent_gap(self) -> float:
        return abs(self.fitted_exponent - self.expected_exponent)

    def to_dict(self) -> dict:
        return dict(self.__dict__, exponent_gap=self.exponent_gap)


def check_B3(N: int, sigma: float, y_sweep=tuple(np.geomspace(100.0, 1e4, 9)),
             spec: QuadratureSpec = B3_SPEC) -> B3Report:
    """Convolution values over ``|y|``, the weighted sup and the fitted decay exponent."""
    if sigma == N - 2:
        raise ValueError("sigma = N-2 is the excluded borderline case")
    ys = np.asarray(y_sweep, dtype=float)
    vals = np.array([convolution_B3(N, sigma, y, spec)[0] for y in ys])
    expo = min(sigma, N - 2.0)
    weighted = vals * (1.0 + ys) ** expo
    fitted = -float(np.polyfit(np.log(ys), np.log(vals), 1)[0])
    return B3Report(N, float(sigma), tuple(ys), tuple(vals), tuple(weighted),
                    float(weighted.max()), fitted, expo)


def export_report_csv(path, rows: list[dict]) -> None:
    """Rows of ``(parameters..., constant, passed)`` as CSV."""
    if not rows:
        raise ValueError("nothing to write")
    keys = list(rows[0].keys())
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow(row)
