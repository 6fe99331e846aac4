"""scikit-learn style wrappers: hyper-parameters in ``__init__``, work in ``fit``,
results in trailing-underscore attributes."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .energy_constants import compute_energy_constants
from .ground_state import DEFAULT_R_MAX, DEFAULT_TOL, solve_ground_state
from .params import SystemParams
from .reduced_energy import F_leading, ReducedEnergyModel, lambda_star, maximize_numeric


def _radii(r) -> np.ndarray:
    return check_array(np.asarray(r, dtype=float).reshape(-1, 1), ensure_all_finite=True).ravel()


class GroundStateSolver(BaseEstimator):
    """Shoot for the radial ground state. ``predict(r)`` returns columns (U, V)."""

    def __init__(self, N: int = 5, p: float = 7 / 3, tol: float = DEFAULT_TOL,
                 r_max: float = DEFAULT_R_MAX):
        self.N = N
        self.p = p
        self.tol = tol
        self.r_max = r_max

    def fit(self, X=None, y=None):
        self.params_ = SystemParams.create(self.N, self.p)
        self.profile_ = solve_ground_state(self.params_, tol=self.tol, r_max=self.r_max)
        self.beta_ = self.profile_.beta
        self.tail_a_ = self.profile_.tail_a
        self.tail_b_ = self.profile_.tail_b
        self.regime_ = self.profile_.regime
        return self

    def predict(self, r) -> np.ndarray:
        check_is_fitted(self, "profile_")
        rr = _radii(r)
        if np.any(rr < 0):
            raise ValueError("radii must be non-negative")
        return np.column_stack([self.profile_.u(rr), self.profile_.v(rr)])


class EnergyConstantsEstimator(BaseEstimator):
    """Energy constants of a solved profile; fits its own profile when none is given."""

    def __init__(self, N: int = 5, p: float = 7 / 3, tol: float = DEFAULT_TOL, Q3=None):
        self.N = N
        self.p = p
        self.tol = tol
        self.Q3 = Q3

    def fit(self, X=None, y=None, profile=None):
        self.params_ = SystemParams.create(self.N, self.p)
        prof = profile if profile is not None else solve_ground_state(self.params_, tol=self.tol)
        self.constants_ = compute_energy_constants(prof, self.params_, self.Q3)
        self.Q_ = np.array([getattr(self.constants_, f"Q{i}") for i in range(5)])
        return self


class ReducedEnergyMaximizer(BaseEstimator):
    """Locate the maximizer of the leading-order reduced energy.

    ``predict(L)`` returns ``F(L)``; ``lambda_star_`` is the closed form and
    ``lambda_numeric_`` the golden-section result.
    """

    def __init__(self, Q0: float = 1.0, Q1: float = 1.0, Q4: float = 1.0, gamma: float = -1.0,
                 epsilon: float = 0.01, k: int = 1, N: int = 5, delta: float = 0.01,
                 tol: float = 1e-12):
        self.Q0 = Q0
        self.Q1 = Q1
        self.Q4 = Q4
        self.gamma = gamma
        self.epsilon = epsilon
        self.k = k
        self.N = N
        self.delta = delta
        self.tol = tol

    def fit(self, X=None, y=None):
        self.model_ = ReducedEnergyModel(self.Q0, self.Q1, self.Q4, self.gamma, self.epsilon,
                                         self.k, self.N, self.delta)
        self.lambda_star_ = lambda_star(self.model_)
        self.lambda_numeric_ = maximize_numeric(self.model_, tol=self.tol)
        self.window_ok_ = self.delta < self.lambda_star_ < 1.0 / self.delta
        return self

    def predict(self, Lam) -> np.ndarray:
        check_is_fitted(self, "model_")
        return np.asarray(F_leading(self.model_, _radii(Lam)))
