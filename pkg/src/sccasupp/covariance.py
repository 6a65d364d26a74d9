"""Empirical covariances, the deterministic two-way split, and precision providers.

Data are mean-zero by construction and are never centered here.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from sccasupp.errors import DimensionMismatch, MissingTruth, SingularCovariance

ZERO_TOL = 1e-12


class Target(enum.Enum):
    FOR_X = "x"
    FOR_Y = "y"


class PrecisionKind(enum.Enum):
    KNOWN_EXACT = "known_exact"
    SAMPLE_INVERSE = "sample_inverse"
    BANDED_TRUTH = "banded_truth"


class XiType(enum.Enum):
    """Error-rate class of a precision estimate; controls the xi factor of the cut."""

    A = "A"
    B = "B"
    C = "C"


@dataclass(frozen=True)
class SplitSample:
    X: np.ndarray
    Y: np.ndarray
    split_at: int

    def __post_init__(self):
        if self.X.ndim != 2 or self.Y.ndim != 2 or self.X.shape[0] != self.Y.shape[0]:
            raise DimensionMismatch(
                f"X {self.X.shape} and Y {self.Y.shape} must be 2-d with equal row counts"
            )
        n = self.X.shape[0]
        if not (1 <= self.split_at <= n - 1):
            raise ValueError(f"split_at={self.split_at} leaves an empty half (n={n})")

    @classmethod
    def from_arrays(cls, X, Y) -> "SplitSample":
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        return cls(X, Y, X.shape[0] // 2)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def swapped(self) -> "SplitSample":
        """The same sample with the roles of X and Y exchanged."""
        return SplitSample(self.Y, self.X, self.split_at)


class DataHalf(NamedTuple):
    X: np.ndarray
    Y: np.ndarray


def halves(sample: SplitSample) -> tuple[DataHalf, DataHalf]:
    k = sample.split_at
    return DataHalf(sample.X[:k], sample.Y[:k]), DataHalf(sample.X[k:], sample.Y[k:])


def empirical_cross_cov(X_part, Y_part) -> np.ndarray:
    """``X_partᵀ Y_part / m`` without centering."""
    X_part = np.atleast_2d(np.asarray(X_part, dtype=float))
    Y_part = np.atleast_2d(np.asarray(Y_part, dtype=float))
    m = X_part.shape[0]
    if m != Y_part.shape[0] or m < 1:
        raise DimensionMismatch(f"row counts differ or are zero: {X_part.shape} vs {Y_part.shape}")
    return X_part.T @ Y_part / m


def banded_precision(dim: int, band=(0.65, 0.4)) -> np.ndarray:
    """Banded inverse covariance with unit diagonal and ``band[k-1]`` on the k-th off-diagonals."""
    P = np.eye(dim)
    for k, w in enumerate(band, start=1):
        if k < dim:
            P += w * (np.eye(dim, k=k) + np.eye(dim, k=-k))
    return P


@dataclass(frozen=True)
class PrecisionProvider:
    """Source of Σy⁻¹ (``Target.FOR_Y``) or Σx⁻¹ (``Target.FOR_X``).

    ``estimator`` is an optional callable taking the relevant half-sample block
    (rows × dim) and returning a precision estimate; it is how a type-A
    estimator (CLIME, nodewise Lasso, ...) would be plugged in.
    """

    target: Target
    kind: PrecisionKind
    band: tuple = (0.65, 0.4)
    estimator: Optional[Callable[[np.ndarray], np.ndarray]] = None
    estimator_xi: XiType = XiType.A

    @property
    def xi_type(self) -> XiType:
        if self.estimator is not None:
            return self.estimator_xi
        if self.kind is PrecisionKind.SAMPLE_INVERSE:
            return XiType.B
        return XiType.C


def precision_of(provider: PrecisionProvider, sample_half: DataHalf, model_truth=None) -> np.ndarray:
    block = sample_half.X if provider.target is Target.FOR_X else sample_half.Y
    if provider.estimator is not None:
        P = np.asarray(provider.estimator(block), dtype=float)
        return (P + P.T) / 2

    if provider.kind is PrecisionKind.SAMPLE_INVERSE:
        m, dim = block.shape
        if m < dim + 1:
            raise SingularCovariance(f"need at least {dim + 1} rows to invert a {dim}x{dim} covariance, got {m}")
        S = block.T @ block / m
        if np.linalg.matrix_rank(S) < dim:
            raise SingularCovariance("empirical covariance is rank deficient")
        P = np.linalg.inv(S)
        return (P + P.T) / 2

    if model_truth is None:
        raise MissingTruth(f"{provider.kind.value} needs the model truth")
    sigma = model_truth.sigma_x if provider.target is Target.FOR_X else model_truth.sigma_y
    if provider.kind is PrecisionKind.BANDED_TRUTH:
        return banded_precision(sigma.shape[0], provider.band)
    P = np.linalg.inv(sigma)
    return (P + P.T) / 2


def row_sparsity(matrix) -> int:
    """Largest number of nonzero entries in any column."""
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    if A.size == 0:
        return 0
    return int((np.abs(A) > ZERO_TOL).sum(axis=0).max())
