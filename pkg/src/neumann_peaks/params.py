"""Scalar parameters of the boundary-peak construction.

Everything downstream takes a :class:`SystemParams`; the exponent ``q`` is
always derived from ``p`` so the pair stays on the critical hyperbola.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

HYPERBOLA_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when a parameter set violates a precondition of the construction."""


def critical_q(N: int, p: float) -> float:
    """Return the exponent q pairing with p on the critical hyperbola."""
    if N < 3:
        raise ParameterError(f"dimension N={N} must be >= 3")
    inv = (N - 2) / N - 1.0 / (p + 1.0)
    if inv <= 0.0:
        raise ParameterError(f"p={p} leaves no admissible q for N={N} (1/(q+1) <= 0)")
    return 1.0 / inv - 1.0


def sobolev_exponent(N: int) -> float:
    return (N + 2) / (N - 2)


def tau_of(N: int) -> float:
    return (N - 3) / (N - 2)


def check_condition_A(N: int, p: float) -> bool:
    """Exponent window under which the projected bubbles are good approximations."""
    if N < 5:
        raise ParameterError(f"condition (A) needs N >= 5, got N={N}")
    right = sobolev_exponent(N)
    # right endpoint is closed; allow round-off in p computed as a fraction
    if p > right * (1 + 1e-14):
        return False
    if N == 5:
        return p > 2.0
    return p > (N + tau_of(N)) / (N - 2)


def epsilon_of_k(N: int, k: int) -> float:
    if N < 5:
        raise ParameterError(f"N={N} must be >= 5")
    if k < 1:
        raise ParameterError(f"peak count k={k} must be >= 1")
    return float(k) ** (-(N - 2) / (N - 3))


def decay_regime(N: int, p: float) -> str:
    """Tail regime of the U component: 'fast', 'log' or 'slow'."""
    threshold = N / (N - 2)
    if abs(p - threshold) <= 1e-12 * threshold:
        return "log"
    return "fast" if p > threshold else "slow"


@dataclass(frozen=True)
class SystemParams:
    """Validated parameter set. Build it with :meth:`create`.

    ``q``, ``tau`` and ``epsilon`` are derived and never read from user input.
    """

    N: int
    p: float
    q: float
    tau: float
    mu: float
    gamma: float
    k: int
    epsilon: float
    delta: float = 0.01
    require_condition_A: bool = field(default=True, compare=False)

    @classmethod
    def create(
        cls,
        N: int,
        p: float,
        k: int = 1,
        mu: float = 1.0,
        gamma: float = -1.0,
        delta: float = 0.01,
        require_condition_A: bool = True,
    ) -> "SystemParams":
        N = int(N)
        if N < 5:
            raise ParameterError(f"N={N} rejected: the construction needs N >= 5")
        p = float(p)
        if require_condition_A and not check_condition_A(N, p):
            raise ParameterError(f"p={p} violates condition (A) for N={N}")
        if mu <= 0:
            raise ParameterError(f"mu={mu} must be positive")
        if not 0.0 < delta < 1.0:
            raise ParameterError(f"delta={delta} must lie in (0, 1)")
        q = critical_q(N, p)
        crit = sobolev_exponent(N)
        if p > crit * (1 + 1e-14) or q < crit * (1 - 1e-14):
            raise ParameterError(f"need p <= (N+2)/(N-2) <= q, got p={p}, q={q}")
        obj = cls(
            N=N,
            p=p,
            q=q,
            tau=tau_of(N),
            mu=float(mu),
            gamma=float(gamma),
            k=int(k),
            epsilon=epsilon_of_k(N, int(k)),
            delta=float(delta),
            require_condition_A=require_condition_A,
        )
        obj.check_hyperbola()
        return obj

    @classmethod
    def from_config(cls, config: dict, **overrides) -> "SystemParams":
        """Build from a JSON-style mapping with keys N, p, k, mu, gamma, delta."""
        allowed = {"N", "p", "k", "mu", "gamma", "delta"}
        merged = {key: config[key] for key in allowed if key in config}
        merged.update({key: val for key, val in overrides.items() if val is not None})
        unknown = set(config) - allowed
        if unknown:
            raise ParameterError(f"unknown configuration keys: {sorted(unknown)}")
        if "N" not in merged or "p" not in merged:
            raise ParameterError("configuration needs at least N and p")
        return cls.create(**merged)

    @classmethod
    def from_json(cls, path, **overrides) -> "SystemParams":
        return cls.from_config(json.loads(Path(path).read_text()), **overrides)

    def to_config(self) -> dict:
        return {"N": self.N, "p": self.p, "k": self.k, "mu": self.mu,
                "gamma": self.gamma, "delta": self.delta}

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("require_condition_A")
        return out

    def hyperbola_residual(self) -> float:
        return abs(1.0 / (self.p + 1) + 1.0 / (self.q + 1) - (self.N - 2) / self.N)

    def check_hyperbola(self) -> None:
        res = self.hyperbola_residual()
        if res > HYPERBOLA_TOL:
            raise ParameterError(f"(p, q) off the critical hyperbola by {res:.3e}")

    @property
    def is_diagonal(self) -> bool:
        return math.isclose(self.p, self.q, rel_tol=1e-13)

    @property
    def regime(self) -> str:
        return decay_regime(self.N, self.p)

    @property
    def u_scaling(self) -> float:
        """Exponent N/(q+1) of the U component under dilation."""
        return self.N / (self.q + 1)

    @property
    def v_scaling(self) -> float:
        return self.N / (self.p + 1)

    @property
    def m_log(self) -> int:
        """Power of |ln eps| in the boundary-correction bounds (1 for N=5, else 0)."""
        return 1 if self.N == 5 else 0

    def with_k(self, k: int) -> "SystemParams":
        return SystemParams.create(self.N, self.p, k=k, mu=self.mu, gamma=self.gamma,
                                   delta=self.delta,
                                   require_condition_A=self.require_condition_A)
