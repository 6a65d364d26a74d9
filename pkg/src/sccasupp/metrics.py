"""Support-recovery error metrics: type I, type II and symmetric Hamming."""

from __future__ import annotations

import math
from dataclasses import dataclass

from sccasupp.errors import DegenerateTruth


def _as_sets(d_hat, d_true):
    d_hat, d_true = set(d_hat), set(d_true)
    if not d_true:
        raise DegenerateTruth("true support is empty")
    return d_hat, d_true


def type_one_error(d_hat, d_true, ambient_dim) -> float:
    """Fraction of the true zeros that were selected: |D̂ \\ D| / (dim − |D|)."""
    d_hat, d_true = _as_sets(d_hat, d_true)
    if len(d_true) >= ambient_dim:
        raise DegenerateTruth("true support covers every coordinate")
    return len(d_hat - d_true) / (ambient_dim - len(d_true))


def type_two_error(d_hat, d_true) -> float:
    """Fraction of the true support that was missed."""
    d_hat, d_true = _as_sets(d_hat, d_true)
    return len(d_true - d_hat) / len(d_true)


def hamming_error(d_hat, d_true) -> float:
    """1 − |D ∩ D̂| / sqrt(|D| |D̂|), taken as 1 for an empty estimate."""
    d_hat, d_true = _as_sets(d_hat, d_true)
    if not d_hat:
        return 1.0
    return 1.0 - len(d_hat & d_true) / math.sqrt(len(d_true) * len(d_hat))


@dataclass(frozen=True)
class RecoveryErrors:
    type_one: float
    type_two: float
    hamming: float
    exact: bool


def recovery_errors(d_hat, d_true, ambient_dim) -> RecoveryErrors:
    t1 = type_one_error(d_hat, d_true, ambient_dim)
    t2 = type_two_error(d_hat, d_true)
    return RecoveryErrors(t1, t2, hamming_error(d_hat, d_true), t1 == 0 and t2 == 0)
