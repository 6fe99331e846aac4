"""Leading-order reduced energy in the concentration parameter and its maximizer.

    F(L) = k (Q0 - Q1 gamma L eps - Q4 L^(N-2) eps)

For gamma < 0 the two L-terms compete and F has a single interior maximum.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .params import ParameterError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BracketError(ValueError):
    pass


class MonotoneBracketError(BracketError):
    """F is monotone on the bracket, so the maximum sits at an endpoint."""


class DegenerateBracketError(BracketError):
    pass


@dataclass(frozen=True)
class ReducedEnergyModel:
    """Coefficients of the leading-order reduced energy.

    ``perturbation`` is an optional callable ``g(L)`` added inside the bracket,
    ``F = k (... + g(L))``, for robustness experiments on the o(eps) term.
    """

    Q0: float
    Q1: float
    Q4: float
    gamma: float
    epsilon: float
    k: int
    N: int
    delta: float = 0.01
    perturbation: Optional[Callable[[float], float]] = None

    def __post_init__(self):
        if self.N < 5:
            raise ParameterError("N must be at least 5")
        for name in ("Q0", "Q1", "Q4", "epsilon"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive")
        if not self.gamma < 0:
            raise ParameterError("gamma must be negative for an interior maximum")
        if int(self.k) != self.k or self.k < 1:
            raise ParameterError("k must be a positive integer")
        if not 0 < self.delta < 1:
            raise ParameterError("delta must lie in (0, 1)")

    @classmethod
    def from_constants(cls, constants, params, **kw) -> "ReducedEnergyModel":
        """Build from an :class:`EnergyConstants` and :class:`SystemParams`."""
        return cls(constants.Q0, constants.Q1, constants.Q4, params.gamma, params.epsilon,
                   params.k, params.N, params.delta, **kw)

    def with_perturbation(self, g: Callable[[float], float]) -> "ReducedEnergyModel":
        return replace(self, perturbation=g)

    def with_k(self, k: int, epsilon: float | None = None) -> "ReducedEnergyModel":
        return replace(self, k=k, epsilon=self.epsilon if epsilon is None else epsilon)


def F_leading(model: ReducedEnergyModel, Lam):
    """``k (Q0 - Q1 gamma L eps - Q4 L^(N-2) eps)`` (plus the perturbation if set)."""
    L = np.asarray(Lam, dtype=float)
    if np.any(L <= 0):
        raise ValueError("Lambda must be positive")
    m = model
    val = m.Q0 - m.Q1 * m.gamma * L * m.epsilon - m.Q4 * L ** (m.N - 2) * m.epsilon
    if m.perturbation is not None:
        val = val + np.vectorize(m.perturbation, otypes=[float])(L)
    val = m.k * val
    return float(val) if np.ndim(Lam) == 0 else val


def dF(model: ReducedEnergyModel, Lam: float) -> float:
    """First derivative of the unperturbed leading-order energy."""
    m = model
    return m.k * m.epsilon * (-m.Q1 * m.gamma - (m.N - 2) * m.Q4 * Lam ** (m.N - 3))


def d2F(model: ReducedEnergyModel, Lam: float) -> float:
    m = model
    return -m.k * m.epsilon * (m.N - 2) * (m.N - 3) * m.Q4 * Lam ** (m.N - 4)


def derivative_scale(model: ReducedEnergyModel) -> float:
    """Size of the competing terms in F'; used to make F' = 0 relative."""
    return model.k * model.epsilon * abs(model.Q1 * model.gamma)


def lambda_star(model: ReducedEnergyModel) -> float:
    """Closed-form maximizer ``(-Q1 gamma / (Q4 (N-2)))^(1/(N-3))``."""
    if not model.gamma < 0:
        raise ParameterError("gamma must be negative")
    return (-model.Q1 * model.gamma / (model.Q4 * (model.N - 2))) ** (1.0 / (model.N - 3))


def _greater(model: ReducedEnergyModel, c: float, d: float) -> bool:
    """``F(c) > F(d)`` decided from divided differences, without cancellation."""
    m = model
    n = m.N - 2
    # c^n - d^n = (c - d) * sum c^i d^(n-1-i)
    s = math.fsum(c ** i * d ** (n - 1 - i) for i in range(n))
    diff = (c - d) * (-m.Q1 * m.gamma - m.Q4 * s)
    if m.perturbation is not None:
        diff += (m.perturbation(c) - m.perturbation(d)) / m.epsilon
    return diff > 0


def maximize_numeric(model: ReducedEnergyModel, bracket=None, tol: float = 1e-12,
                     max_iter: int = 500) -> float:
    """Golden-section search for the maximizer of F on ``bracket``.

    Comparisons use divided differences, so the search resolves the
    maximizer well below the square root of machine precision. The default
    bracket is ``(delta, 1/delta)``.
    """
    a, b = bracket if bracket is not None else (model.delta, 1.0 / model.delta)
    a, b = float(a), float(b)
    if not (a > 0 and b > a and math.isfinite(b)):
        raise DegenerateBracketError(f"degenerate bracket ({a}, {b})")
    if model.perturbation is None:
        if dF(model, a) <= 0 or dF(model, b) >= 0:
            raise MonotoneBracketError(f"F is monotone on ({a}, {b}); no interior maximum")
    lo, hi = a, b
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    for _ in range(max_iter):
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
        if _greater(model, c, d):
            hi, d = d, c
            c = hi - INV_PHI * (hi - lo)
        else:
            lo, c = c, d
            d = lo + INV_PHI * (hi - lo)
    x = 0.5 * (lo + hi)
    edge = 10 * tol * max(1.0, abs(x))
    if x - a <= edge or b - x <= edge:
        raise MonotoneBracketError(f"maximum at the bracket edge ({a}, {b})")
    return x


def existence_window(model: ReducedEnergyModel) -> bool:
    """True iff ``delta < Lambda* < 1/delta``."""
    ls = lambda_star(model)
    return model.delta < ls < 1.0 / model.delta


def energy_curve(model: ReducedEnergyModel, lams=None) -> tuple[np.ndarray, np.ndarray]:
    if lams is None:
        lams = np.geomspace(model.delta, 1.0 / model.delta, 401)
    lams = np.asarray(lams, dtype=float)
    return lams, F_leading(model, lams)


def export_curve_csv(path, model: ReducedEnergyModel, lams=None) -> None:
    L, F = energy_curve(model, lams)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["Lambda", "F"])
        for x, y in zip(L, F):
            w.writerow([repr(float(x)), repr(float(y))])


def summary(model: ReducedEnergyModel) -> dict:
    ls = lambda_star(model)
    return {"lambda_star": ls, "window_ok": existence_window(model),
            "F_at_lambda_star": F_leading(model, ls),
            "dF_relative": dF(model, ls) / derivative_scale(model),
            "d2F": d2F(model, ls)}


def export_summary_json(path, model: ReducedEnergyModel, **extra) -> str:
    text = json.dumps(dict(summary(model), **extra), indent=2, sort_keys=True)
    Path(path).write_text(text)
    return text


def perturbation_shift(model: ReducedEnergyModel, c: float, sigma: float,
                       g: Callable[[float], float] = math.sin, bracket=None) -> float:
    """Move of the numeric maximizer under ``F += k c eps^(1+sigma) g(L)``."""
    eps = model.epsilon
    pert = model.with_perturbation(lambda L: c * eps ** (1 + sigma) * g(L))
    return maximize_numeric(pert, bracket) - lambda_star(model)
