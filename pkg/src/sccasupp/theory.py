"""Regime boundaries, impossibility thresholds, rank-one KL and the Fano bound.

All logarithms are natural.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from sccasupp.errors import FamilyTooSmall, NotUnitNorm, PreconditionViolated

UNIT_TOL = 1e-10


class Regime(enum.Enum):
    EASY = "Easy"
    DIFFICULT = "Difficult"
    HARD = "Hard"
    IMPOSSIBLE = "Impossible"


@dataclass(frozen=True)
class RegimeReport:
    regime: Regime
    easy_b: float
    difficult_b: float
    hard_b: float
    n: int
    p: int
    q: int
    s_x: int
    s_y: int

    def as_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "easy_b": self.easy_b,
            "difficult_b": self.difficult_b,
            "hard_b": self.hard_b,
            "n": self.n,
            "p": self.p,
            "q": self.q,
            "s_x": self.s_x,
            "s_y": self.s_y,
        }


def classify_regime(n, p, q, s_x, s_y) -> RegimeReport:
    """Place max(s_x, s_y) against sqrt(n/log(p+q)), sqrt(n) and n/log(p+q), constants dropped."""
    if n < 2 or p + q < 3:
        raise PreconditionViolated("need n >= 2 and p + q >= 3")
    log_d = math.log(p + q)
    easy_b, difficult_b, hard_b = math.sqrt(n / log_d), math.sqrt(n), n / log_d
    s = max(s_x, s_y)
    if s <= easy_b:
        regime = Regime.EASY
    elif s <= difficult_b:
        regime = Regime.DIFFICULT
    elif s <= hard_b:
        regime = Regime.HARD
    else:
        regime = Regime.IMPOSSIBLE
    return RegimeReport(regime, easy_b, difficult_b, hard_b, n, p, q, s_x, s_y)


def _check_lower_bound_pre(p, s):
    if s <= 1:
        raise PreconditionViolated(f"sparsity must exceed 1, got s={s}")
    if p - s <= 16:
        raise PreconditionViolated(f"need p - s > 16, got p - s = {p - s}")


def impossible_sparsity_predicate(n, p, s, b_const) -> bool:
    """True when s > 16 n / ((B² − 1) log(p − s)): no decoder has error below 1/2."""
    _check_lower_bound_pre(p, s)
    return s > 16 * n / ((b_const**2 - 1) * math.log(p - s))


def min_signal_threshold(n, p, s, b_const) -> float:
    """Signal strength at or below which exact recovery has minimax error above 1/2."""
    if p - s <= 16:
        raise PreconditionViolated(f"need p - s > 16, got p - s = {p - s}")
    if n < 1:
        raise PreconditionViolated("need n >= 1")
    return math.sqrt((b_const**2 - 1) * math.log(p - s) / (8 * n))


def _unit(v, name):
    v = np.asarray(v, dtype=float).ravel()
    if abs(np.linalg.norm(v) - 1) > UNIT_TOL:
        raise NotUnitNorm(f"{name} has norm {np.linalg.norm(v):.12g}")
    return v


def spiked_covariance(alpha, beta, rho) -> np.ndarray:
    """[[I_p, ρ α βᵀ], [ρ β αᵀ, I_q]]."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    beta = np.asarray(beta, dtype=float).ravel()
    C = rho * np.outer(alpha, beta)
    return np.block([[np.eye(alpha.size), C], [C.T, np.eye(beta.size)]])


def gaussian_kl(sigma_1, sigma_2) -> float:
    """KL(N(0, Σ1) ‖ N(0, Σ2)) from dense matrices."""
    k = sigma_1.shape[0]
    _, logdet_1 = np.linalg.slogdet(sigma_1)
    _, logdet_2 = np.linalg.slogdet(sigma_2)
    return 0.5 * (logdet_2 - logdet_1 - k + np.trace(np.linalg.solve(sigma_2, sigma_1)))


def kl_rank1(alpha1, alpha2, beta, rho) -> float:
    """Per-observation KL between two rank-one spiked models sharing β and ρ.

    Equals ρ² ‖α1 − α2‖² / (2 (1 − ρ²)); multiply by n for n i.i.d. draws.
    """
    a1, a2 = _unit(alpha1, "alpha1"), _unit(alpha2, "alpha2")
    _unit(beta, "beta")
    return rho**2 * float(np.sum((a1 - a2) ** 2)) / (2 * (1 - rho**2))


@dataclass(frozen=True)
class SpikedPair:
    """Two rank-one spiked models differing only in the left direction."""

    alpha1: np.ndarray
    alpha2: np.ndarray
    beta: np.ndarray
    rho: float

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        for name in ("alpha1", "alpha2", "beta"):
            _unit(getattr(self, name), name)

    def kl(self) -> float:
        return kl_rank1(self.alpha1, self.alpha2, self.beta, self.rho)

    def covariances(self):
        return spiked_covariance(self.alpha1, self.beta, self.rho), spiked_covariance(self.alpha2, self.beta, self.rho)


def fano_lower_bound(n, rho, sup_pair_dist_sq, family_size) -> float:
    """max(0, 1 − (n ρ² d² / (1 − ρ²) + log 2) / log(|E| − 1))."""
    if family_size < 3:
        raise FamilyTooSmall(f"packing family needs at least 3 members, got {family_size}")
    info = n * rho**2 * sup_pair_dist_sq / (1 - rho**2)
    return max(0.0, 1 - (info + math.log(2)) / math.log(family_size - 1))


def sparsity_packing_bound(n, p, s, b_const) -> float:
    """Fano bound on the swap-one-coordinate packing (|E| = s(p − s), d² = 4/s, ρ = 1/B)."""
    return fano_lower_bound(n, 1 / b_const, 4 / s, s * (p - s))
