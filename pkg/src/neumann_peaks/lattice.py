"""Peaks equally spaced on a circle of radius 1/eps and their lattice sums."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .params import epsilon_of_k

_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


def zeta(s: float, n_terms: int = 1000, em_terms: int = 6) -> float:
    """Riemann zeta for real ``s > 1``: partial sum plus an Euler-Maclaurin tail."""
    if s <= 1:
        raise ValueError("zeta(s) requires s > 1 here")
    n = n_terms
    head = math.fsum(float(j) ** -s for j in range(1, n))
    tail = [n ** (1 - s) / (s - 1), 0.5 * n ** -s]
    rising = s  # s (s+1) ... (s + 2i - 2)
    fact = 2.0
    for i in range(1, em_terms + 1):
        tail.append(_BERNOULLI[i - 1] / fact * rising * n ** (-s - 2 * i + 1))
        rising *= (s + 2 * i - 1) * (s + 2 * i)
        fact *= (2 * i + 1) * (2 * i + 2)
    return math.fsum([head] + tail)


@dataclass(frozen=True)
class PeakConfig:
    """k points on the circle of radius 1/eps in the (y1, y2) plane of R^N."""

    k: int
    epsilon: float
    N: int = 5

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.N < 2:
            raise ValueError("need at least two coordinates")

    @classmethod
    def for_dimension(cls, N: int, k: int) -> "PeakConfig":
        return cls(k, epsilon_of_k(N, k), N)

    @property
    def points(self) -> np.ndarray:
        ang = 2.0 * np.pi * np.arange(self.k) / self.k
        pts = np.zeros((self.k, self.N))
        pts[:, 0] = np.cos(ang) / self.epsilon
        pts[:, 1] = np.sin(ang) / self.epsilon
        return pts


def pairwise_distance(config: PeakConfig, i: int, j: int) -> float:
    """``(2/eps) |sin((j-i) pi/k)|`` for 0-based peak indices."""
    for idx in (i, j):
        if not 0 <= idx < config.k:
            raise IndexError(f"peak index {idx} out of range for k={config.k}")
    if i == j:
        raise ValueError("distinct peaks required")
    return 2.0 / config.epsilon * abs(math.sin((j - i) * math.pi / config.k))


def lattice_sum(config: PeakConfig, alpha: float, base: int = 0) -> float:
    """``sum_{j != base} |x_j - x_base|^(-alpha)`` with compensated summation."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    k = config.k
    if k == 1:
        return 0.0
    j = (np.arange(k) - base) % k
    j = j[j != 0]
    d = 2.0 / config.epsilon * np.abs(np.sin(j * np.pi / k))
    return math.fsum(d ** -alpha)


def Q3_constant(N: int) -> float:
    """``2 zeta(N-2) / (2 pi)^(N-2)``, the large-k limit of the normalized sum."""
    if N < 5:
        raise ValueError("N must be at least 5")
    return 2.0 * zeta(N - 2.0) / (2.0 * math.pi) ** (N - 2)


def normalized_sum(N: int, k: int, alpha: float | None = None) -> float:
    """``lattice_sum / (k eps)^alpha`` with ``eps = eps(k)``; alpha defaults to N-2."""
    alpha = N - 2.0 if alpha is None else alpha
    cfg = PeakConfig.for_dimension(N, k)
    return lattice_sum(cfg, alpha) / (k * cfg.epsilon) ** alpha


def richardson_Q3(N: int, ks=(64, 128, 256, 512, 1024, 2048, 4096), order: float = 2.0) -> float:
    """Extrapolate ``normalized_sum`` in k; the leading error is ``O(k^-2)``."""
    vals = np.array([normalized_sum(N, k) for k in ks], dtype=float)
    ks = np.asarray(ks, dtype=float)
    # one Richardson step on the last two doublings
    r = (ks[-1] / ks[-2]) ** order
    return float((r * vals[-1] - vals[-2]) / (r - 1.0))


@dataclass(frozen=True)
class RegimeReport:
    N: int
    alpha: float
    ks: tuple[int, ...]
    sums: tuple[float, ...]
    fitted_exponent: float
    expected_regime: str
    observed_regime: str
    log_ratio_spread: float
    log_slope: float

    @property
    def passed(self) -> bool:
        return self.expected_regime == self.observed_regime

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["passed"] = self.passed
        return d


def default_k_sweep(alpha: float) -> tuple[int, ...]:
    """Power-of-two sweeps over two decades; alpha < 1 starts at 1e3.

    For alpha < 1 the Euler-Maclaurin correction decays only like k^(alpha-1).
    """
    if alpha < 1:
        return tuple(int(k) for k in np.geomspace(1000, 100000, 9).round())
    return tuple(2 ** e for e in range(6, 14))


def regime_exponent_check(N: int, alpha: float, ks=None, exponent_tol: float = 0.02,
                          log_tol: float = 0.03) -> RegimeReport:
    """Classify the growth of ``lattice_sum`` as k grows with ``eps = eps(k)``.

    ``alpha > 1``: sum / eps^alpha ~ k^alpha, i.e. ``(eps k)^alpha``;
    ``alpha = 1``: sum / (eps k) ~ ln k;
    ``alpha < 1``: sum / eps^alpha ~ k.
    """
    ks = tuple(int(k) for k in (ks or default_k_sweep(alpha)))
    if len(ks) < 3:
        raise ValueError("need at least three k values")
    sums, scaled = [], []
    for k in ks:
        cfg = PeakConfig.for_dimension(N, k)
        s = lattice_sum(cfg, alpha)
        sums.append(s)
        scaled.append(s / cfg.epsilon ** alpha)
    lk = np.log(np.asarray(ks, dtype=float))
    expo = float(np.polyfit(lk, np.log(scaled), 1)[0])
    # ln k diagnostics: sum/(eps k ln k) should be flat, sum/(eps k) linear in ln k
    lin = np.asarray(scaled) / np.asarray(ks, dtype=float) ** alpha
    ratio = lin / lk
    spread = float(ratio.max() / ratio.min() - 1.0)
    slope = float(np.polyfit(lk, lin, 1)[0])
    expected = "power" if alpha > 1 else ("log" if alpha == 1 else "linear")
    if abs(expo - alpha) <= exponent_tol and alpha > 1:
        observed = "power"
    elif alpha == 1 and spread <= log_tol:
        observed = "log"
    elif abs(expo - 1.0) <= exponent_tol and alpha < 1:
        observed = "linear"
    else:
        observed = "unclassified"
    return RegimeReport(N, float(alpha), ks, tuple(sums), expo, expected, observed, spread, slope)


def export_sweep_csv(path, N: int, alpha: float, ks) -> list[dict]:
    """Write rows ``k, alpha, sum, asymptotic, ratio`` with ``asymptotic = Q3 (k eps)^alpha``.

    The asymptotic column uses Q3 for alpha = N-2 and is blank otherwise.
    """
    rows = []
    for k in ks:
        cfg = PeakConfig.for_dimension(N, int(k))
        s = lattice_sum(cfg, alpha)
        asym = Q3_constant(N) * (k * cfg.epsilon) ** alpha if alpha == N - 2 else math.nan
        rows.append({"k": int(k), "alpha": alpha, "sum": s, "asymptotic": asym,
                     "ratio": s / asym if np.isfinite(asym) else math.nan})
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["k", "alpha", "sum", "asymptotic", "ratio"])
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return rows
