"""Support recovery: the clean-then-threshold decoder and coordinate thresholding (CT).

``recover_supp`` multiplies a precision estimate, a held-out cross-covariance
and a preliminary direction estimate, then keeps the rows whose largest
absolute score exceeds a cut. ``ct_recover_support`` builds the preliminary
directions by peeling off known Σx, Σy, soft-thresholding entrywise,
sandwiching back and taking an SVD.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from sccasupp._linalg import pd_power, sign_normalize
from sccasupp.covariance import (
    DataHalf,
    SplitSample,
    XiType,
    empirical_cross_cov,
    halves,
    row_sparsity,
)
from sccasupp.errors import DimensionMismatch, InvalidS, RankDeficient, SvdFailure

K_MULT = 1288.0
C1_MULT = 50.0


class Side(enum.Enum):
    FOR_U = "alpha"
    FOR_V = "beta"


class CtCase(enum.Enum):
    CASE_I = "i"
    CASE_II = "ii"
    CASE_III = "iii"


def soft_threshold(x, t):
    """η(x, t) = sign(x) · max(|x| − t, 0); works elementwise on arrays."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# cut policies


def theorem1_cut(n, p, q, s_prec, r, xi_type, c_pr=1.0, b_const=None) -> float:
    """ε_n-proportional cut: ``c_pr · ξ_n · sqrt(log(p+q) s_prec / n)``.

    The admissible interval in the recovery guarantee depends on an
    unspecified constant of B, so ``b_const`` is accepted for the record only.
    """
    if n < 2 or s_prec < 1:
        raise ValueError("need n >= 2 and s_prec >= 1")
    xi_type = XiType(xi_type)
    if xi_type is XiType.A:
        xi = c_pr * math.sqrt(s_prec)
    elif xi_type is XiType.B:
        xi = c_pr * max(math.sqrt(r * math.log(q) / n), 1.0)
    else:
        xi = 1.0
    return c_pr * xi * math.sqrt(math.log(p + q) * s_prec / n)


def simulation_cut(n, p, q, s_prec, c_mult=1.0) -> float:
    if n < 2 or s_prec < 1:
        raise ValueError("need n >= 2 and s_prec >= 1")
    return c_mult * math.sqrt(math.log(p + q) * s_prec / n)


# Thresholding constants of the simulation study, keyed by (covariance case, side).
SIMULATION_CUT_CONSTANTS = {
    ("identity", Side.FOR_U): 1.0,
    ("identity", Side.FOR_V): 1.0,
    ("banded", Side.FOR_U): 0.05,
    ("banded", Side.FOR_V): 0.2,
}


def row_scores(score_matrix) -> np.ndarray:
    return np.abs(np.asarray(score_matrix, dtype=float)).max(axis=1)


def sparsity_aware_cut(base_cut, score_matrix, s) -> float:
    """``max(base_cut, s-th largest row score)``.

    Because rows are kept only when strictly above the cut, this never keeps
    more than ``s - 1`` rows once the s-th score wins; ties drop together.
    """
    scores = row_scores(score_matrix)
    if not 1 <= s <= scores.shape[0]:
        raise InvalidS(f"s={s} must lie in [1, {scores.shape[0]}]")
    kth = np.sort(scores)[::-1][s - 1]
    return float(max(base_cut, kth))


@dataclass(frozen=True)
class CutPolicy:
    kind: str
    c_pr: float = 1.0
    xi_type: XiType = XiType.C
    c_mult: float = 1.0
    value: float = 0.0
    base: Optional["CutPolicy"] = None
    s: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("theorem_one", "simulation", "manual", "sparsity_aware"):
            raise ValueError(f"unknown cut policy {self.kind!r}")
        if self.kind == "manual" and self.value < 0:
            raise ValueError("manual cut must be nonnegative")
        if self.kind == "sparsity_aware" and (self.s is None or self.s < 1 or self.base is None):
            raise ValueError("sparsity-aware policy needs a base policy and s >= 1")

    @classmethod
    def theorem_one(cls, c_pr=1.0, xi_type=XiType.C):
        return cls("theorem_one", c_pr=c_pr, xi_type=XiType(xi_type))

    @classmethod
    def simulation(cls, c_mult=1.0):
        return cls("simulation", c_mult=c_mult)

    @classmethod
    def manual(cls, value):
        return cls("manual", value=float(value))

    @classmethod
    def sparsity_aware(cls, base, s):
        return cls("sparsity_aware", base=base, s=int(s))

    def resolve(self, n, p, q, s_prec, r=1, score_matrix=None) -> float:
        if self.kind == "theorem_one":
            return theorem1_cut(n, p, q, s_prec, r, self.xi_type, self.c_pr)
        if self.kind == "simulation":
            return simulation_cut(n, p, q, s_prec, self.c_mult)
        if self.kind == "manual":
            return self.value
        base = self.base.resolve(n, p, q, s_prec, r, score_matrix)
        if score_matrix is None:
            raise ValueError("sparsity-aware cut needs the score matrix")
        return sparsity_aware_cut(base, score_matrix, self.s)


# ---------------------------------------------------------------------------
# the clean-then-threshold decoder


@dataclass(frozen=True)
class SupportEstimate:
    indices: tuple
    score_matrix: np.ndarray
    cut_used: float
    side: Side = Side.FOR_V

    @property
    def size(self) -> int:
        return len(self.indices)


def threshold_rows(score_matrix, cut) -> tuple:
    return tuple(int(k) for k in np.flatnonzero(row_scores(score_matrix) > cut))


def clean_scores(U_hat, precision, cross_cov_yx) -> np.ndarray:
    U_hat = np.asarray(U_hat, dtype=float)
    precision = np.asarray(precision, dtype=float)
    cross_cov_yx = np.asarray(cross_cov_yx, dtype=float)
    if U_hat.ndim == 1:
        U_hat = U_hat[:, None]
    q = precision.shape[0]
    if precision.shape != (q, q) or cross_cov_yx.shape != (q, U_hat.shape[0]):
        raise DimensionMismatch(
            f"precision {precision.shape}, cross-covariance {cross_cov_yx.shape} and directions {U_hat.shape} are not conformable"
        )
    return precision @ cross_cov_yx @ U_hat


def recover_supp(U_hat_first_half, precision_first_half, cross_cov_second_half, cut, r=None, side=Side.FOR_V) -> SupportEstimate:
    """Clean the preliminary directions with held-out data and threshold row maxima.

    ``cross_cov_second_half`` is Σ̂yx (q×p) from the second half. Only the
    first ``r`` columns of ``U_hat_first_half`` are used.
    """
    if cut < 0:
        raise ValueError("cut must be nonnegative")
    U_hat = np.asarray(U_hat_first_half, dtype=float)
    if U_hat.ndim == 1:
        U_hat = U_hat[:, None]
    if r is not None:
        if r > U_hat.shape[1]:
            raise DimensionMismatch(f"r={r} exceeds the {U_hat.shape[1]} supplied directions")
        U_hat = U_hat[:, :r]
    scores = clean_scores(U_hat, precision_first_half, cross_cov_second_half)
    return SupportEstimate(threshold_rows(scores, cut), scores, float(cut), side)


# ---------------------------------------------------------------------------
# coordinate thresholding


@dataclass(frozen=True)
class CtThreshold:
    K: float
    C1: float
    case: CtCase
    theta: float
    b_eff: Optional[float] = None


def ct_constants(sigma_x, sigma_y, k_mult=K_MULT, c1_mult=C1_MULT):
    """(K, C1, B_eff) with B_eff the largest eigenvalue among Σx, Σy and their inverses."""
    ex = np.linalg.eigvalsh(sigma_x)
    ey = np.linalg.eigvalsh(sigma_y)
    b_eff = float(max(ex.max(), ey.max(), 1 / ex.min(), 1 / ey.min()))
    return k_mult * b_eff**4, c1_mult * b_eff**4, b_eff


def ct_case(p, q, s_x, s_y) -> CtCase:
    dim = p + q
    s2 = (s_x + s_y) ** 2
    if s2 < 2**0.25 * dim**0.75:
        return CtCase.CASE_I
    if s2 <= dim / math.e:
        return CtCase.CASE_II
    return CtCase.CASE_III


def ct_threshold(p, q, s_x, s_y, K=K_MULT, C1=C1_MULT, b_eff=None) -> CtThreshold:
    if s_x + s_y < 2:
        raise ValueError("need s_x + s_y >= 2")
    case = ct_case(p, q, s_x, s_y)
    if case is CtCase.CASE_I:
        theta = math.sqrt(C1 * math.log(p + q))
    elif case is CtCase.CASE_II:
        theta = math.sqrt(K * math.log((p + q) / (s_x + s_y) ** 2))
    else:
        theta = 0.0
    return CtThreshold(K=K, C1=C1, case=case, theta=theta, b_eff=b_eff)


def ct_threshold_for_model(model, k_mult=K_MULT, c1_mult=C1_MULT) -> CtThreshold:
    """CT threshold with constants scaled by the model's eigenvalue extremes."""
    K, C1, b_eff = ct_constants(model.sigma_x, model.sigma_y, k_mult, c1_mult)
    truth = model.support()
    return ct_threshold(model.p, model.q, truth.s_x, truth.s_y, K, C1, b_eff)


def _theta(threshold) -> float:
    return threshold.theta if isinstance(threshold, CtThreshold) else float(threshold)


def ct_directions_from_cross_cov(cross_cov_xy, n_eff, sigma_x, sigma_y, r, theta) -> np.ndarray:
    """Peel, soft-threshold at theta/sqrt(n_eff), sandwich, SVD, premultiply."""
    sx_half, sx_mhalf = pd_power(sigma_x, 0.5), pd_power(sigma_x, -0.5)
    sy_half, sy_inv = pd_power(sigma_y, 0.5), pd_power(sigma_y, -1.0)
    peeled = pd_power(sigma_x, -1.0) @ cross_cov_xy @ sy_inv
    S = sx_half @ soft_threshold(peeled, theta / math.sqrt(n_eff)) @ sy_half
    try:
        left, sv, _ = np.linalg.svd(S, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from None

    U_pre = sign_normalize(left[:, :r])
    tol = max(S.shape) * np.finfo(float).eps * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > tol)) if sv.size and sv[0] > 0 else 0
    U_hat = sx_mhalf @ U_pre
    if rank < r:
        U_hat[:, rank:] = 0.0
        raise RankDeficient(f"sandwiched matrix has rank {rank} < r={r}", padded=U_hat, rank=rank)
    return U_hat


def ct_estimate_directions(sample_first_half: DataHalf, model_truth, r, threshold) -> np.ndarray:
    """Estimate U (p×r) from the first half with known Σx, Σy.

    ``threshold`` is a :class:`CtThreshold` or the bare theta. Raises
    :class:`RankDeficient` (carrying zero-padded directions) when fewer than
    ``r`` singular values survive.
    """
    X1, Y1 = sample_first_half
    if X1.shape[0] < 2:
        raise ValueError("first half needs at least two rows")
    return ct_directions_from_cross_cov(
        empirical_cross_cov(X1, Y1), X1.shape[0], model_truth.sigma_x, model_truth.sigma_y, r, _theta(threshold)
    )


def whitened_svd_directions(sample_half: DataHalf, model_truth, r) -> np.ndarray:
    """Directions from the SVD of the whitened sample cross-covariance (CT with theta = 0)."""
    return ct_estimate_directions(sample_half, model_truth, r, 0.0)


def _resolve_cut(cut_policy, n, p, q, s_prec, r, scores):
    if isinstance(cut_policy, CutPolicy):
        return cut_policy.resolve(n, p, q, s_prec, r, scores)
    return float(cut_policy)


def recover_with_directions(sample: SplitSample, model_truth, U_hat, cut_policy, side=Side.FOR_V) -> SupportEstimate:
    """Clean ``U_hat`` against the second half with the known precision Σy⁻¹.

    For ``Side.FOR_U`` pass the swapped sample and the transposed model.
    """
    _, (X2, Y2) = halves(sample)
    precision = model_truth.sigma_y_inv
    scores = clean_scores(U_hat, precision, empirical_cross_cov(Y2, X2))
    cut = _resolve_cut(cut_policy, sample.n, model_truth.p, model_truth.q, row_sparsity(precision), U_hat.shape[1], scores)
    return SupportEstimate(threshold_rows(scores, cut), scores, cut, side)


def ct_recover_support(sample: SplitSample, model_truth, r, threshold, cut_policy, side=Side.FOR_V) -> SupportEstimate:
    """Full CT pipeline: CT directions on the first half, then the decoder on the second.

    ``Side.FOR_U`` swaps the roles of X and Y throughout. The cut is resolved
    with the full sample size ``n``; a rank-deficient CT step propagates
    :class:`RankDeficient`.
    """
    side = Side(side)
    if side is Side.FOR_U:
        est = ct_recover_support(sample.swapped(), model_truth.transposed(), r, threshold, cut_policy, Side.FOR_V)
        return SupportEstimate(est.indices, est.score_matrix, est.cut_used, Side.FOR_U)
    first, _ = halves(sample)
    U_hat = ct_estimate_directions(first, model_truth, r, threshold)
    return recover_with_directions(sample, model_truth, U_hat, cut_policy, side)


def condition1_error(U_hat, U_true, sigma_x) -> float:
    """max_i min_{w=±1} (w û_i − u_i)ᵀ Σx (w û_i − u_i)."""
    U_hat = np.asarray(U_hat, dtype=float)
    U_true = np.asarray(U_true, dtype=float)
    if U_hat.ndim == 1:
        U_hat = U_hat[:, None]
    if U_true.ndim == 1:
        U_true = U_true[:, None]
    sigma_x = np.asarray(sigma_x, dtype=float)
    p = U_true.shape[0]
    if U_hat.shape != U_true.shape or sigma_x.shape != (p, p):
        raise DimensionMismatch(f"U_hat {U_hat.shape}, U_true {U_true.shape}, sigma_x {sigma_x.shape}")
    worst = 0.0
    for i in range(U_true.shape[1]):
        errs = []
        for w in (1.0, -1.0):
            d = w * U_hat[:, i] - U_true[:, i]
            errs.append(float(d @ sigma_x @ d))
        worst = max(worst, min(errs))
    return worst
