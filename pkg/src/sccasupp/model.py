"""Gaussian sparse CCA models: construction, validation and sampling."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from sccasupp._linalg import pd_power, psd_sqrt, sym
from sccasupp.covariance import ZERO_TOL, SplitSample, banded_precision
from sccasupp.errors import (
    CholeskyFailure,
    ClassViolation,
    DimensionMismatch,
    InvalidSparsity,
    NotPositiveDefinite,
)

ORTHO_TOL = 1e-10


class CovCase(enum.Enum):
    IDENTITY_A = "identity"
    BANDED_B = "banded"


@dataclass(frozen=True)
class SupportTruth:
    d_u: tuple
    d_v: tuple
    s_x: int
    s_y: int
    sig_x: float
    sig_y: float


def _frozen(a):
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CcaModel:
    """Joint Gaussian model with Σxy = Σx U diag(λ) Vᵀ Σy.

    Instances come out of :func:`build_model`, which enforces the class
    conditions; constructing one directly skips validation.
    """

    sigma_x: np.ndarray
    sigma_y: np.ndarray
    U: np.ndarray
    V: np.ndarray
    lam: np.ndarray
    b_const: float

    @property
    def p(self) -> int:
        return self.sigma_x.shape[0]

    @property
    def q(self) -> int:
        return self.sigma_y.shape[0]

    @property
    def r(self) -> int:
        return self.lam.shape[0]

    @cached_property
    def sigma_xy(self) -> np.ndarray:
        return _frozen(self.sigma_x @ (self.U * self.lam) @ self.V.T @ self.sigma_y)

    @cached_property
    def sigma_x_inv(self) -> np.ndarray:
        return _frozen(sym(np.linalg.inv(self.sigma_x)))

    @cached_property
    def sigma_y_inv(self) -> np.ndarray:
        return _frozen(sym(np.linalg.inv(self.sigma_y)))

    def transposed(self) -> "CcaModel":
        """The model of (Y, X): roles of the two blocks exchanged."""
        return CcaModel(self.sigma_y, self.sigma_x, self.V, self.U, self.lam, self.b_const)

    def support(self) -> SupportTruth:
        row_u = np.abs(self.U).max(axis=1)
        row_v = np.abs(self.V).max(axis=1)
        d_u = tuple(int(i) for i in np.flatnonzero(row_u > ZERO_TOL))
        d_v = tuple(int(i) for i in np.flatnonzero(row_v > ZERO_TOL))
        return SupportTruth(
            d_u=d_u,
            d_v=d_v,
            s_x=len(d_u),
            s_y=len(d_v),
            sig_x=float(row_u[list(d_u)].min()) if d_u else 0.0,
            sig_y=float(row_v[list(d_v)].min()) if d_v else 0.0,
        )


def _sigma_gram_schmidt(M, sigma, name):
    """Modified Gram–Schmidt in the inner product <a, b> = aᵀ Σ b."""
    M = np.array(M, dtype=float, copy=True)
    for i in range(M.shape[1]):
        for j in range(i):
            M[:, i] -= (M[:, j] @ sigma @ M[:, i]) * M[:, j]
        norm2 = M[:, i] @ sigma @ M[:, i]
        if norm2 <= 1e-24:
            raise ClassViolation(f"{name} is not of full column rank")
        M[:, i] /= np.sqrt(norm2)
    return M


def _check_class(sigma_x, sigma_y, lam, b_const):
    if lam[-1] <= 1 / b_const:
        raise ClassViolation(f"A2: smallest canonical correlation {lam[-1]:g} must exceed 1/B = {1 / b_const:g}")
    gaps = lam[:-1] - lam[1:]
    if gaps.size and gaps.min() < 1 / b_const:
        raise ClassViolation(f"A5: eigengap {gaps.min():g} is below 1/B = {1 / b_const:g}")
    for name, S in (("Sigma_x", sigma_x), ("Sigma_y", sigma_y)):
        ev = np.linalg.eigvalsh(S)
        if ev.min() <= 1 / b_const or ev.max() >= b_const:
            raise ClassViolation(
                f"A4: eigenvalues of {name} span [{ev.min():g}, {ev.max():g}], outside (1/B, B) with B = {b_const:g}"
            )


def build_model(sigma_x, sigma_y, U_raw, V_raw, lam, b_const) -> CcaModel:
    sigma_x = sym(np.atleast_2d(np.asarray(sigma_x, dtype=float)))
    sigma_y = sym(np.atleast_2d(np.asarray(sigma_y, dtype=float)))
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    U_raw = np.asarray(U_raw, dtype=float).reshape(sigma_x.shape[0], -1)
    V_raw = np.asarray(V_raw, dtype=float).reshape(sigma_y.shape[0], -1)
    p, q, r = sigma_x.shape[0], sigma_y.shape[0], lam.shape[0]

    if sigma_x.shape != (p, p) or sigma_y.shape != (q, q):
        raise DimensionMismatch("covariance blocks must be square")
    if U_raw.shape != (p, r) or V_raw.shape != (q, r):
        raise DimensionMismatch(f"U_raw {U_raw.shape} / V_raw {V_raw.shape} do not match p={p}, q={q}, r={r}")
    if not 1 <= r <= min(p, q):
        raise DimensionMismatch(f"rank r={r} must lie in [1, min(p, q)]")
    if b_const <= 1:
        raise ClassViolation(f"B must exceed 1, got {b_const}")
    if np.any(lam <= 0) or np.any(lam >= 1) or np.any(np.diff(lam) >= 0):
        raise ClassViolation("A2: canonical correlations must be strictly decreasing inside (0, 1)")

    for name, S in (("Sigma_x", sigma_x), ("Sigma_y", sigma_y)):
        try:
            np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(f"{name} is not positive definite") from None

    U = _sigma_gram_schmidt(U_raw, sigma_x, "U_raw")
    V = _sigma_gram_schmidt(V_raw, sigma_y, "V_raw")
    _check_class(sigma_x, sigma_y, lam, b_const)

    model = CcaModel(_frozen(sigma_x), _frozen(sigma_y), _frozen(U), _frozen(V), _frozen(lam), float(b_const))
    try:
        np.linalg.cholesky(joint_covariance(model))
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite("joint covariance is not positive definite") from None
    if np.abs(U.T @ sigma_x @ U - np.eye(r)).max() > ORTHO_TOL or np.abs(V.T @ sigma_y @ V - np.eye(r)).max() > ORTHO_TOL:
        raise ClassViolation("canonical directions could not be Sigma-orthonormalized to 1e-10")
    return model


def rank1_directions(s: int):
    """The unnormalized moderate-signal and small-signal direction patterns on ``s`` coordinates."""
    head = 1 - (s - 1) * s ** (-4 / 3)
    if head <= 0:
        raise InvalidSparsity(f"1 - (s-1) s^(-4/3) = {head:g} is not positive for s={s}")
    alpha = np.full(s, 1 / np.sqrt(s))
    beta = np.full(s, s ** (-2 / 3))
    beta[0] = np.sqrt(head)
    return alpha, beta


def make_rank1_model(p, q, s, rho, cov_case=CovCase.IDENTITY_A, band=(0.65, 0.4)) -> CcaModel:
    """Rank-one simulation model with ``s`` active coordinates on each side.

    ``BANDED_B`` inverts a banded precision matrix; with the default band
    weights that matrix is only positive definite up to dimension 11.
    """
    cov_case = CovCase(cov_case)
    if not (2 <= s <= min(p, q)):
        raise InvalidSparsity(f"s={s} must lie in [2, min(p, q)={min(p, q)}]")
    if not 0 < rho < 1:
        raise ValueError(f"rho={rho} must lie in (0, 1)")
    a_head, b_head = rank1_directions(s)
    alpha_star = np.zeros(p)
    alpha_star[:s] = a_head
    beta_star = np.zeros(q)
    beta_star[:s] = b_head

    if cov_case is CovCase.IDENTITY_A:
        sigma_x, sigma_y = np.eye(p), np.eye(q)
    else:
        mats = []
        for dim in (p, q):
            P = banded_precision(dim, band)
            if np.linalg.eigvalsh(P).min() <= 0:
                raise NotPositiveDefinite(f"banded precision with band {tuple(band)} is not positive definite at dimension {dim}")
            mats.append(sym(np.linalg.inv(P)))
        sigma_x, sigma_y = mats

    alpha = alpha_star / np.sqrt(alpha_star @ sigma_x @ alpha_star)
    beta = beta_star / np.sqrt(beta_star @ sigma_y @ beta_star)
    ex, ey = np.linalg.eigvalsh(sigma_x), np.linalg.eigvalsh(sigma_y)
    b_min = max(1 / rho, ex.max(), ey.max(), 1 / ex.min(), 1 / ey.min())
    return build_model(sigma_x, sigma_y, alpha[:, None], beta[:, None], [rho], 1.01 * b_min)


def joint_covariance(model: CcaModel) -> np.ndarray:
    sxy = model.sigma_xy
    return np.block([[model.sigma_x, sxy], [sxy.T, model.sigma_y]])


def _check_n(n):
    if n < 4:
        raise ValueError(f"n={n} is too small; need n >= 4")


def sample(model: CcaModel, n: int, seed) -> SplitSample:
    """Draw ``n`` i.i.d. rows from N(0, Σ) via the Cholesky factor of Σ."""
    _check_n(n)
    try:
        L = np.linalg.cholesky(joint_covariance(model))
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(str(exc)) from None
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, model.p + model.q))
    data = Z @ L.T
    return SplitSample(data[:, : model.p], data[:, model.p :], n // 2)


def hidden_variable_factors(model: CcaModel):
    """Loadings (W1, W2) on the shared latent factor and residual roots (H1, H2)."""
    root_lam = np.sqrt(model.lam)
    W1 = model.sigma_x @ model.U * root_lam
    W2 = model.sigma_y @ model.V * root_lam
    H1 = psd_sqrt(model.sigma_x - W1 @ W1.T)
    H2 = psd_sqrt(model.sigma_y - W2 @ W2.T)
    return W1, W2, H1, H2


def sample_hidden_variable(model: CcaModel, n: int, seed) -> SplitSample:
    """Sample X = Z W1ᵀ + Z1 H1, Y = Z W2ᵀ + Z2 H2 with a shared latent Z."""
    _check_n(n)
    W1, W2, H1, H2 = hidden_variable_factors(model)
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, model.r))
    Z1 = rng.standard_normal((n, model.p))
    Z2 = rng.standard_normal((n, model.q))
    return SplitSample(Z @ W1.T + Z1 @ H1, Z @ W2.T + Z2 @ H2, n // 2)


def whitened_cross_cov(model: CcaModel) -> np.ndarray:
    """Σx^{-1/2} Σxy Σy^{-1/2}; its top singular values are the canonical correlations."""
    return pd_power(model.sigma_x, -0.5) @ model.sigma_xy @ pd_power(model.sigma_y, -0.5)
