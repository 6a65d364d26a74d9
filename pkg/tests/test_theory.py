import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sccasupp.errors import FamilyTooSmall, NotUnitNorm, PreconditionViolated
from sccasupp.theory import (
    Regime,
    SpikedPair,
    classify_regime,
    fano_lower_bound,
    gaussian_kl,
    impossible_sparsity_predicate,
    kl_rank1,
    min_signal_threshold,
    sparsity_packing_bound,
    spiked_covariance,
)


def unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


class TestRegime:
    @pytest.mark.parametrize("s,regime", [(3, Regime.EASY), (20, Regime.DIFFICULT), (100, Regime.HARD), (200, Regime.IMPOSSIBLE)])
    def test_examples(self, s, regime):
        rep = classify_regime(1000, 100, 100, s, s)
        assert rep.regime is regime
        assert rep.easy_b == pytest.approx(13.738, abs=1e-3)
        assert rep.difficult_b == pytest.approx(31.623, abs=1e-3)
        assert rep.hard_b == pytest.approx(188.74, abs=1e-2)

    def test_uses_larger_sparsity(self):
        assert classify_regime(1000, 100, 100, 3, 20).regime is Regime.DIFFICULT

    def test_json_round_trip(self):
        d = classify_regime(1000, 100, 100, 3, 3).as_dict()
        assert json.loads(json.dumps(d))["regime"] == "Easy"

    @given(st.integers(2, 10**7), st.integers(2, 10**5), st.integers(2, 10**5))
    def test_boundaries_ordered(self, n, p, q):
        rep = classify_regime(n, p, q, 1, 1)
        assert rep.easy_b <= rep.difficult_b
        # sqrt(n) <= n / log(p + q) needs n >= log(p + q)^2, not just log(p + q) >= 1
        if n >= math.log(p + q) ** 2:
            assert rep.difficult_b <= rep.hard_b * (1 + 1e-12)
        else:
            assert rep.difficult_b > rep.hard_b

    def test_boundaries_can_invert(self):
        rep = classify_regime(10, 500, 500, 1, 1)
        assert rep.difficult_b > rep.hard_b


class TestLowerBounds:
    def test_impossible_examples(self):
        assert 16 * 100 / (3 * math.log(500)) == pytest.approx(85.82, abs=0.01)
        assert impossible_sparsity_predicate(100, 1000, 500, 2.0)
        assert not impossible_sparsity_predicate(10**6, 1000, 10, 2.0)

    @pytest.mark.parametrize("p,s", [(1000, 1), (20, 5)])
    def test_preconditions(self, p, s):
        with pytest.raises(PreconditionViolated):
            impossible_sparsity_predicate(100, p, s, 2.0)

    def test_min_signal(self):
        assert min_signal_threshold(100, 110, 10, math.sqrt(2)) == pytest.approx(0.075871, abs=1e-6)
        assert min_signal_threshold(400, 110, 10, 2.0) == pytest.approx(min_signal_threshold(100, 110, 10, 2.0) / 2)
        assert min_signal_threshold(100, 110, 10, 1 + 1e-12) < 1e-5
        with pytest.raises(PreconditionViolated):
            min_signal_threshold(100, 20, 10, 2.0)


class TestKl:
    def test_equal_directions(self):
        a = np.array([1.0, 0, 0])
        assert kl_rank1(a, a, np.array([0, 1.0]), 0.5) == 0.0

    def test_orthogonal(self):
        assert kl_rank1([1, 0], [0, 1], [1, 0], 0.5) == pytest.approx(1 / 3, abs=1e-15)

    def test_dense_scalar_oracle(self):
        # KL(N(0, a) || N(0, b)) = (log(b / a) - 1 + a / b) / 2
        assert gaussian_kl(np.array([[2.0]]), np.array([[3.0]])) == pytest.approx(0.5 * (math.log(1.5) - 1 + 2 / 3))

    def test_dense_oracle_p3(self):
        rng = np.random.default_rng(4)
        a1, a2, b = unit(rng, 3), unit(rng, 3), unit(rng, 3)
        dense = gaussian_kl(spiked_covariance(a1, b, 0.4), spiked_covariance(a2, b, 0.4))
        assert abs(kl_rank1(a1, a2, b, 0.4) - dense) < 1e-10

    def test_determinant_identity(self):
        rng = np.random.default_rng(5)
        S = spiked_covariance(unit(rng, 4), unit(rng, 3), 0.6)
        assert np.linalg.det(S) == pytest.approx(1 - 0.36)

    @given(st.integers(0, 2**32 - 1), st.floats(0.01, 0.99))
    @settings(max_examples=100)
    def test_nonnegative_symmetric(self, seed, rho):
        rng = np.random.default_rng(seed)
        a1, a2, b = unit(rng, 5), unit(rng, 5), unit(rng, 4)
        k = kl_rank1(a1, a2, b, rho)
        assert k >= 0 and k == pytest.approx(kl_rank1(a2, a1, b, rho))

    def test_not_unit(self):
        with pytest.raises(NotUnitNorm):
            kl_rank1([1.0, 1.0], [1.0, 0.0], [1.0], 0.5)

    def test_spiked_pair(self):
        pair = SpikedPair(np.array([1.0, 0]), np.array([0, 1.0]), np.array([1.0]), 0.5)
        S1, S2 = pair.covariances()
        assert pair.kl() == pytest.approx(gaussian_kl(S1, S2), abs=1e-12)
        with pytest.raises(ValueError):
            SpikedPair(np.array([1.0]), np.array([1.0]), np.array([1.0]), 1.0)


class TestFano:
    def test_zero_samples(self):
        assert fano_lower_bound(0, 0.5, 1.0, 102) == pytest.approx(1 - math.log(2) / math.log(101))
        assert fano_lower_bound(0, 0.5, 1.0, 102) == pytest.approx(0.849810, abs=1e-6)

    def test_indistinguishable(self):
        assert fano_lower_bound(100, 0.5, 0.0, 10**12) > 0.97

    def test_clamped(self):
        assert fano_lower_bound(10**6, 0.9, 2.0, 10) == 0.0

    def test_family_too_small(self):
        with pytest.raises(FamilyTooSmall):
            fano_lower_bound(1, 0.5, 1.0, 2)

    @given(st.integers(0, 1000), st.integers(0, 1000), st.floats(0, 4), st.floats(0, 4), st.integers(3, 10**6), st.integers(3, 10**6))
    def test_monotone(self, n1, n2, d1, d2, e1, e2):
        (n1, n2), (d1, d2), (e1, e2) = sorted((n1, n2)), sorted((d1, d2)), sorted((e1, e2))
        assert fano_lower_bound(n2, 0.5, 1.0, 50) <= fano_lower_bound(n1, 0.5, 1.0, 50)
        assert fano_lower_bound(10, 0.5, d2, 50) <= fano_lower_bound(10, 0.5, d1, 50)
        assert fano_lower_bound(10, 0.5, 1.0, e1) <= fano_lower_bound(10, 0.5, 1.0, e2)

    def test_packing_bound(self):
        assert sparsity_packing_bound(100, 1000, 500, 2.0) == pytest.approx(
            fano_lower_bound(100, 0.5, 4 / 500, 500 * 500)
        )
