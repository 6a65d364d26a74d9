"""Truncated likelihood-ratio norm ‖L_n^{≤D}‖² under independent Rademacher priors.

The norm is

    E[ W · Σ_{d=0}^{⌊D/2⌋} C(d+n−1, d) (B⁻² (α1ᵀα2)(β1ᵀβ2))^d ]

over independent replicas α1, α2 ~ π_x and β1, β2 ~ π_y, where W indicates
‖α1‖‖β1‖ < B and ‖α2‖‖β2‖ < B.

Three evaluators are provided: a Monte Carlo estimator, an exact evaluator
that sums over support-overlap counts (polynomial in p and q), and a brute
force enumeration of the prior support used to validate the exact one.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from sccasupp.errors import TooLarge

ENUMERATION_LIMIT = 10**8
EXACT_DIM_LIMIT = 500


@dataclass(frozen=True)
class LowDegConfig:
    n: int
    p: int
    q: int
    s_x: int
    s_y: int
    b_const: float
    degree: int
    mc_samples: int = 100_000
    seed: int = 0

    def __post_init__(self):
        for name in ("n", "p", "q", "s_x", "s_y", "mc_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.degree < 0:
            raise ValueError("degree must be nonnegative")
        if self.s_x > self.p or self.s_y > self.q:
            raise ValueError("sparsity cannot exceed the dimension")
        if self.b_const <= 0:
            raise ValueError("b_const must be positive")
        if self.b_const <= 2:
            warnings.warn("b_const <= 2: the Bayesian reduction to detection needs B > 2", stacklevel=3)
        if self.degree > min(math.sqrt(self.p), math.sqrt(self.q), self.n):
            warnings.warn("degree exceeds min(sqrt(p), sqrt(q), n)", stacklevel=3)

    def replace(self, **changes) -> "LowDegConfig":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return LowDegConfig(**fields)


@dataclass(frozen=True)
class NormEstimate:
    value: float
    std_error: float
    method: str


def sample_rademacher_prior(dim, s, seed=None, size=None) -> np.ndarray:
    """Entries ±1/sqrt(s) with probability s/(2 dim) each, 0 otherwise.

    ``seed`` may be an int or a ``numpy.random.Generator``; ``size`` prepends
    a batch shape.
    """
    if not 1 <= s <= dim:
        raise ValueError(f"s={s} must lie in [1, {dim}]")
    rng = np.random.default_rng(seed)
    shape = (dim,) if size is None else (*np.atleast_1d(size), dim)
    u = rng.random(shape)
    half = s / (2 * dim)
    out = np.where(u < half, 1.0, np.where(u < 2 * half, -1.0, 0.0))
    return out / math.sqrt(s)


def _log_coefficients(n, dmax):
    d = np.arange(dmax + 1)
    return d, gammaln(d + n) - gammaln(d + 1) - gammaln(n)


def _truncated_series(x, n, dmax):
    """Σ_{d≤dmax} C(d+n−1, d) x^d per entry of ``x``, accumulated in signed log space."""
    x = np.asarray(x, dtype=float)
    d, log_c = _log_coefficients(n, dmax)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_abs = np.log(np.abs(x))[:, None]
        log_terms = np.where(d == 0, 0.0, d * log_abs) + log_c
    signs = np.where((x[:, None] < 0) & (d % 2 == 1), -1.0, 1.0)
    log_mag, sign = logsumexp(log_terms, b=signs, axis=1, return_sign=True)
    if np.any(np.isinf(log_mag) & (log_mag > 0)) or np.max(log_mag, initial=-np.inf) > 709:
        raise OverflowError("truncated series exceeds the double range")
    return sign * np.exp(log_mag)


def lowdeg_norm_mc(config: LowDegConfig, batch_size=100_000) -> NormEstimate:
    """Monte Carlo mean and standard error over independent prior replicas."""
    rng = np.random.default_rng(config.seed)
    dmax = config.degree // 2
    b2 = config.b_const**2
    total, total_sq, done = 0.0, 0.0, 0
    while done < config.mc_samples:
        m = min(batch_size, config.mc_samples - done)
        a1 = sample_rademacher_prior(config.p, config.s_x, rng, m)
        a2 = sample_rademacher_prior(config.p, config.s_x, rng, m)
        b1 = sample_rademacher_prior(config.q, config.s_y, rng, m)
        b2_ = sample_rademacher_prior(config.q, config.s_y, rng, m)
        w = ((a1 * a1).sum(1) * (b1 * b1).sum(1) < b2) & ((a2 * a2).sum(1) * (b2_ * b2_).sum(1) < b2)
        x = (a1 * a2).sum(1) * (b1 * b2_).sum(1) / b2
        vals = np.where(w, _truncated_series(x, config.n, dmax), 0.0)
        total += vals.sum()
        total_sq += (vals * vals).sum()
        done += m
    mean = total / done
    var = max(total_sq / done - mean * mean, 0.0) * done / max(done - 1, 1)
    return NormEstimate(float(mean), float(math.sqrt(var / done)), "MonteCarlo")


def _overlap_moments(dim, s, ds):
    """Moments of the replica overlap grouped by support sizes.

    Returns M[n1, n2, j] = E[1{|supp a1| = n1, |supp a2| = n2} (a1ᵀa2)^{ds[j]}].
    Coordinates fall in five classes (both nonzero, only first, only second,
    neither); given k shared coordinates, s·a1ᵀa2 is a sum of k fair signs.
    """
    t = s / dim
    log_both, log_one, log_none = xlogy(2, t), xlogy(1, t) + xlogy(1, 1 - t), xlogy(2, 1 - t)
    M = np.zeros((dim + 1, dim + 1, len(ds)))
    o = np.arange(dim + 1)
    for k in range(dim + 1):
        j = np.arange(k + 1)
        log_binom = gammaln(k + 1) - gammaln(j + 1) - gammaln(k - j + 1) - k * math.log(2)
        diffs = (2 * j - k) / s
        mom = np.array([np.sum(np.exp(log_binom) * diffs**d) if d else 1.0 for d in ds])

        o1, o2 = np.meshgrid(o[: dim - k + 1], o[: dim - k + 1], indexing="ij")
        rest = dim - k - o1 - o2
        ok = rest >= 0
        o1, o2, rest = o1[ok], o2[ok], rest[ok]
        with np.errstate(invalid="ignore"):
            log_w = (
                gammaln(dim + 1) - gammaln(k + 1) - gammaln(o1 + 1) - gammaln(o2 + 1) - gammaln(rest + 1)
                + k * log_both + np.where(o1 + o2 > 0, (o1 + o2) * log_one, 0.0) + np.where(rest > 0, rest * log_none, 0.0)
            )
        w = np.nan_to_num(np.exp(log_w))
        np.add.at(M, (k + o1, k + o2), w[:, None] * mom[None, :])
    return M


def lowdeg_norm_exact(config: LowDegConfig) -> NormEstimate:
    """Exact value by summing over support sizes and overlap counts.

    Odd degrees are skipped: sign symmetry of the prior makes their
    expectation vanish even with the indicator W present.
    """
    if max(config.p, config.q) > EXACT_DIM_LIMIT:
        raise TooLarge(f"p={config.p}, q={config.q} too large for exact evaluation")
    dmax = config.degree // 2
    ds = list(range(0, dmax + 1, 2))
    Ma = _overlap_moments(config.p, config.s_x, ds)
    Mb = _overlap_moments(config.q, config.s_y, ds)
    na = np.arange(config.p + 1)[:, None]
    nb = np.arange(config.q + 1)[None, :]
    W = (na * nb < config.b_const**2 * config.s_x * config.s_y).astype(float)
    _, log_c = _log_coefficients(config.n, dmax)
    value = 0.0
    for j, d in enumerate(ds):
        inner = np.sum(W * ((Ma[:, :, j] @ W) @ Mb[:, :, j].T))
        value += math.exp(log_c[d] - 2 * d * math.log(config.b_const)) * inner
    return NormEstimate(float(value), 0.0, "Exact")


def _pair_table(dim, s):
    """All (a1, a2) pairs of prior atoms: probability, |supp a1|, |supp a2|, a1ᵀa2."""
    atoms = np.array(list(itertools.product((-1.0, 0.0, 1.0), repeat=dim)))
    t = s / dim
    probs = np.prod(np.where(atoms == 0, 1 - t, t / 2), axis=1)
    supp = (atoms != 0).sum(1)
    prob = np.outer(probs, probs).ravel()
    n1 = np.repeat(supp, len(atoms))
    n2 = np.tile(supp, len(atoms))
    dot = (atoms @ atoms.T).ravel() / s
    keep = prob > 0
    return prob[keep], n1[keep], n2[keep], dot[keep]


def lowdeg_norm_enumerate(config: LowDegConfig, chunk=2048) -> NormEstimate:
    """Brute force over the whole prior support, all degrees up to ⌊D/2⌋ included."""
    if 9.0**config.p * 9.0**config.q > ENUMERATION_LIMIT:
        raise TooLarge("prior support too large to enumerate")
    pa, n1a, n2a, dota = _pair_table(config.p, config.s_x)
    pb, n1b, n2b, dotb = _pair_table(config.q, config.s_y)
    bound = config.b_const**2 * config.s_x * config.s_y
    d, log_c = _log_coefficients(config.n, config.degree // 2)
    coef = np.exp(log_c - 2 * d * math.log(config.b_const))
    total = 0.0
    for start in range(0, len(pa), chunk):
        sl = slice(start, start + chunk)
        w = (n1a[sl, None] * n1b[None, :] < bound) & (n2a[sl, None] * n2b[None, :] < bound)
        x = dota[sl, None] * dotb[None, :]
        series = np.polynomial.polynomial.polyval(x, coef)
        total += np.sum(pa[sl, None] * pb[None, :] * w * series)
    return NormEstimate(float(total), 0.0, "Exact")
