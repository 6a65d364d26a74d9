import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sccasupp import (
    CtCase,
    CutPolicy,
    DataHalf,
    Side,
    XiType,
    condition1_error,
    ct_estimate_directions,
    ct_recover_support,
    ct_threshold,
    make_rank1_model,
    recover_supp,
    sample,
    simulation_cut,
    soft_threshold,
    sparsity_aware_cut,
    theorem1_cut,
    whitened_svd_directions,
)
from sccasupp._linalg import pd_power
from sccasupp.errors import DimensionMismatch, InvalidS, RankDeficient
from sccasupp.recover import (
    SIMULATION_CUT_CONSTANTS,
    ct_constants,
    ct_directions_from_cross_cov,
    ct_threshold_for_model,
    threshold_rows,
)

from conftest import random_model

finite = st.floats(-1e6, 1e6, allow_nan=False)
nonneg = st.floats(0, 1e6, allow_nan=False)


class TestSoftThreshold:
    def test_examples(self):
        assert soft_threshold(0.0, 1.0) == 0.0
        assert soft_threshold(1.5, 1.0) == 0.5
        assert soft_threshold(-1.5, 1.0) == -0.5
        assert soft_threshold(1.0, 1.0) == 0.0
        assert soft_threshold(-2.75, 0.0) == -2.75

    def test_vectorized(self):
        np.testing.assert_array_equal(soft_threshold(np.array([-3.0, 0.5, 2.0]), 1.0), [-2.0, 0.0, 1.0])

    def test_negative_threshold(self):
        with pytest.raises(ValueError):
            soft_threshold(1.0, -0.1)

    @given(finite, finite, nonneg)
    def test_lipschitz(self, x, y, t):
        assert abs(soft_threshold(x, t) - soft_threshold(y, t)) <= abs(x - y) + 1e-9

    @given(finite, nonneg)
    def test_odd_and_bounded_shift(self, x, t):
        assert soft_threshold(-x, t) == -soft_threshold(x, t)
        assert abs(soft_threshold(x, t) - x) <= t + 1e-9


class TestCuts:
    def test_eps_cut_type_c(self):
        assert theorem1_cut(1000, 100, 100, 1, 1, XiType.C) == pytest.approx(0.0727895, rel=1e-6)

    def test_eps_cut_type_a_vs_c(self):
        c = theorem1_cut(1000, 100, 100, 1, 1, XiType.C, c_pr=3.0)
        a = theorem1_cut(1000, 100, 100, 1, 1, XiType.A, c_pr=3.0)
        assert a == pytest.approx(3.0 * c)

    def test_eps_cut_type_b(self):
        # max(sqrt(r log q / n), 1) = 1 at n = 1000
        assert theorem1_cut(1000, 100, 100, 1, 1, XiType.B) == pytest.approx(theorem1_cut(1000, 100, 100, 1, 1, XiType.C))
        big = theorem1_cut(10, 100, 100, 1, 5, XiType.B)
        assert big == pytest.approx(math.sqrt(5 * math.log(100) / 10) * math.sqrt(math.log(200) / 10))

    def test_sqrt_n_scaling(self):
        assert theorem1_cut(4000, 50, 60, 2, 1, "C") == pytest.approx(theorem1_cut(1000, 50, 60, 2, 1, "C") / 2)

    def test_simulation_cut(self):
        assert simulation_cut(400, 50, 50, 5) == pytest.approx(math.sqrt(5) * simulation_cut(400, 50, 50, 1))
        assert SIMULATION_CUT_CONSTANTS[("identity", Side.FOR_U)] == 1.0
        assert SIMULATION_CUT_CONSTANTS[("banded", Side.FOR_U)] == 0.05
        assert SIMULATION_CUT_CONSTANTS[("banded", Side.FOR_V)] == 0.2

    def test_sparsity_aware_three_rows(self):
        scores = np.array([[3.0], [2.0], [1.0]])
        cut = sparsity_aware_cut(0.0, scores, 2)
        assert cut == 2.0
        assert threshold_rows(scores, cut) == (0,)

    def test_sparsity_aware_base_wins(self):
        assert sparsity_aware_cut(10.0, np.array([[3.0], [-2.0]]), 1) == 10.0

    def test_sparsity_aware_all_rows(self):
        assert sparsity_aware_cut(0.0, np.array([[3.0], [-2.0], [0.5]]), 3) == 0.5

    @pytest.mark.parametrize("s", [0, 4])
    def test_invalid_s(self, s):
        with pytest.raises(InvalidS):
            sparsity_aware_cut(0.0, np.ones((3, 1)), s)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 20))
    def test_sparsity_aware_never_exceeds_s(self, seed, s):
        scores = np.random.default_rng(seed).standard_normal((20, 2))
        cut = sparsity_aware_cut(0.0, scores, s)
        assert len(threshold_rows(scores, cut)) <= s

    def test_policy_resolution(self):
        assert CutPolicy.manual(0.3).resolve(100, 10, 10, 1) == 0.3
        assert CutPolicy.simulation(2.0).resolve(400, 50, 50, 1) == pytest.approx(2 * simulation_cut(400, 50, 50, 1))
        pol = CutPolicy.sparsity_aware(CutPolicy.manual(0.0), 1)
        assert pol.resolve(10, 3, 3, 1, score_matrix=np.array([[1.0], [4.0], [2.0]])) == 4.0
        with pytest.raises(ValueError):
            CutPolicy.manual(-1.0)


class TestRecoverSupp:
    def test_oracle_inputs(self, model_p3):
        m = model_p3
        score_cut = m.lam[-1] * m.support().sig_y / 2
        est = recover_supp(m.U, m.sigma_y_inv, m.sigma_xy.T, score_cut, m.r)
        np.testing.assert_allclose(est.score_matrix, m.V * m.lam, atol=1e-10)
        assert est.indices == m.support().d_v

    @pytest.mark.parametrize("seed", range(5))
    def test_oracle_identity_random(self, seed):
        m = random_model(np.random.default_rng(seed))
        est = recover_supp(m.U, m.sigma_y_inv, m.sigma_xy.T, m.lam[-1] * m.support().sig_y / 2, m.r)
        assert est.indices == m.support().d_v

    def test_extreme_cuts(self, rng):
        U, P, C = rng.standard_normal((4, 1)), np.eye(6), rng.standard_normal((6, 4))
        top = np.abs(P @ C @ U).max()
        assert recover_supp(U, P, C, top + 1).indices == ()
        assert recover_supp(U, P, C, 0.0).indices == tuple(range(6))

    def test_indices_match_scores(self, rng):
        U, P, C = rng.standard_normal((5, 2)), np.eye(7), rng.standard_normal((7, 5))
        est = recover_supp(U, P, C, 0.8)
        assert est.indices == tuple(int(k) for k in np.flatnonzero(np.abs(est.score_matrix).max(1) > 0.8))
        assert est.size == len(est.indices)

    @given(st.integers(0, 2**32 - 1), nonneg, nonneg)
    @settings(max_examples=200)
    def test_monotone_in_cut(self, seed, c1, c2):
        rng = np.random.default_rng(seed)
        U, P, C = rng.standard_normal((4, 2)), np.eye(5), rng.standard_normal((5, 4))
        lo, hi = sorted((c1 % 5, c2 % 5))
        assert set(recover_supp(U, P, C, hi).indices) <= set(recover_supp(U, P, C, lo).indices)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            recover_supp(np.ones((3, 1)), np.eye(4), np.ones((5, 3)), 0.1)
        with pytest.raises(DimensionMismatch):
            recover_supp(np.ones((3, 1)), np.eye(4), np.ones((4, 3)), 0.1, r=2)


class TestCtThreshold:
    def test_case_one(self):
        thr = ct_threshold(300, 300, 2, 2)
        assert thr.case is CtCase.CASE_I
        assert thr.theta == pytest.approx(17.8843, abs=1e-4)

    def test_case_two(self):
        thr = ct_threshold(300, 300, 7, 7)
        assert thr.case is CtCase.CASE_II
        assert thr.theta == pytest.approx(math.sqrt(1288 * math.log(600 / 196)), rel=1e-12)
        assert thr.theta == pytest.approx(37.96, abs=0.01)

    def test_case_three(self):
        thr = ct_threshold(300, 300, 12, 12)
        assert thr.case is CtCase.CASE_III and thr.theta == 0.0

    def test_boundary_value(self):
        assert 2**0.25 * 600**0.75 == pytest.approx(144.17, abs=0.01)
        assert ct_threshold(300, 300, 6, 6).case is CtCase.CASE_I
        assert ct_threshold(300, 300, 7, 6).case is CtCase.CASE_II

    def test_case_two_decreases_in_sparsity(self):
        thetas = [ct_threshold(3000, 3000, s, s).theta for s in range(15, 22)]
        cases = {ct_threshold(3000, 3000, s, s).case for s in range(15, 22)}
        assert cases == {CtCase.CASE_II}
        assert all(a > b for a, b in zip(thetas, thetas[1:]))

    def test_constants_scale_with_b(self):
        K, C1, b = ct_constants(2 * np.eye(3), 0.5 * np.eye(3))
        assert b == 2.0 and K == 1288 * 16 and C1 == 50 * 16

    def test_for_model(self, rank1_identity):
        thr = ct_threshold_for_model(rank1_identity)
        assert thr.b_eff == pytest.approx(1.0)
        assert thr.case is CtCase.CASE_I and thr.theta == pytest.approx(math.sqrt(50 * math.log(100)))


class TestCtDirections:
    def test_population_recovers_span(self, model_p3):
        m = model_p3
        U_hat = ct_directions_from_cross_cov(m.sigma_xy, 100, m.sigma_x, m.sigma_y, m.r, 0.0)
        assert condition1_error(U_hat, m.U, m.sigma_x) < 1e-16
        np.testing.assert_allclose(U_hat.T @ m.sigma_x @ U_hat, np.eye(m.r), atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_orthonormal_output(self, seed):
        m = random_model(np.random.default_rng(seed), 12, 10, 2)
        smp = sample(m, 200, seed)
        U_hat = ct_estimate_directions(DataHalf(smp.X[:100], smp.Y[:100]), m, 2, 0.5)
        np.testing.assert_allclose(U_hat.T @ m.sigma_x @ U_hat, np.eye(2), atol=1e-8)

    def test_full_kill_rank_deficient(self, model_p3):
        smp = sample(model_p3, 40, 0)
        with pytest.raises(RankDeficient) as info:
            ct_estimate_directions(DataHalf(smp.X[:20], smp.Y[:20]), model_p3, 2, 1e6)
        assert info.value.rank == 0
        assert np.all(info.value.padded == 0)

    def test_sign_convention(self, model_p3):
        smp = sample(model_p3, 400, 3)
        U_hat = whitened_svd_directions(DataHalf(smp.X, smp.Y), model_p3, 2)
        again = whitened_svd_directions(DataHalf(smp.X, smp.Y), model_p3, 2)
        assert U_hat.tobytes() == again.tobytes()
        # flipping acts on the whitened vectors, before premultiplying
        w = pd_power(model_p3.sigma_x, 0.5) @ U_hat
        idx = np.abs(w).argmax(axis=0)
        assert np.all(w[idx, range(2)] > 0)

    def test_whitened_equals_case_three(self):
        m = make_rank1_model(100, 100, 12, 0.5, "identity")
        smp = sample(m, 400, 1)
        half = DataHalf(smp.X[:200], smp.Y[:200])
        thr = ct_threshold(100, 100, 12, 12)
        assert thr.case is CtCase.CASE_III
        np.testing.assert_array_equal(whitened_svd_directions(half, m, 1), ct_estimate_directions(half, m, 1, thr))

    @staticmethod
    def _alpha_errors(n, reps, s=10):
        m = make_rank1_model(100, 100, s, 0.5, "identity")
        thr = ct_threshold_for_model(m)
        errs = []
        for seed in range(reps):
            smp = sample(m, n, seed)
            u = ct_estimate_directions(DataHalf(smp.X[: smp.split_at], smp.Y[: smp.split_at]), m, 1, thr)[:, 0]
            errs.append(min(np.linalg.norm(u - m.U[:, 0]), np.linalg.norm(u + m.U[:, 0])))
        return np.array(errs)

    @pytest.mark.slow
    @pytest.mark.xfail(
        strict=True,
        reason="at n=4000 the measured mean l2 error is 0.49; 0.35 needs n of about 8000 (error scales as 30/sqrt(n))",
    )
    def test_rank1_accuracy_example(self):
        errs = self._alpha_errors(4000, 100)
        assert np.mean(errs <= 0.35) >= 0.9

    def test_rank1_consistency(self):
        e1 = self._alpha_errors(4000, 10).mean()
        e2 = self._alpha_errors(16000, 10).mean()
        assert e2 < 0.6 * e1
        assert e2 < 0.3

    def test_thresholding_no_worse_than_whitened(self):
        # s = 10 at p = q = 100 falls in Case III, so CT coincides with the whitened SVD
        m = make_rank1_model(100, 100, 10, 0.5, "identity")
        thr = ct_threshold_for_model(m)
        for seed in range(10):
            smp = sample(m, 4000, seed)
            half = DataHalf(smp.X[:2000], smp.Y[:2000])
            e_ct = condition1_error(ct_estimate_directions(half, m, 1, thr), m.U, m.sigma_x)
            e_w = condition1_error(whitened_svd_directions(half, m, 1), m.U, m.sigma_x)
            assert e_w >= e_ct - 1e-12


class TestCtRecoverSupport:
    def test_side_symmetry(self):
        m = make_rank1_model(30, 30, 4, 0.5, "identity")
        smp = sample(m, 600, 5)
        cut = CutPolicy.simulation(1.0)
        a = ct_recover_support(smp, m, 1, 0.0, cut, Side.FOR_U)
        b = ct_recover_support(smp.swapped(), m.transposed(), 1, 0.0, cut, Side.FOR_V)
        assert a.indices == b.indices and a.side is Side.FOR_U
        np.testing.assert_array_equal(a.score_matrix, b.score_matrix)

    def test_recovers_strong_signal(self):
        m = make_rank1_model(30, 30, 3, 0.8, "identity")
        smp = sample(m, 4000, 2)
        cut = CutPolicy.manual(m.lam[0] * m.support().sig_y / 2)
        est = ct_recover_support(smp, m, 1, 0.0, cut, Side.FOR_V)
        assert est.indices == m.support().d_v

    def test_rank_deficient_propagates(self):
        m = make_rank1_model(30, 30, 3, 0.5, "identity")
        with pytest.raises(RankDeficient):
            ct_recover_support(sample(m, 100, 0), m, 1, 1e6, CutPolicy.manual(0.1))


class TestCondition1:
    def test_examples(self, model_p3):
        U = model_p3.U
        assert condition1_error(U, U, model_p3.sigma_x) == 0.0
        assert condition1_error(-U, U, model_p3.sigma_x) == 0.0
        u = np.array([[1.0], [0.0]])
        assert condition1_error(2 * u, u, np.eye(2)) == pytest.approx(1.0)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=50)
    def test_sign_flip_invariance(self, seed):
        rng = np.random.default_rng(seed)
        U, U_hat = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))
        w = rng.choice([-1.0, 1.0], 3)
        assert condition1_error(U_hat * w, U, np.eye(5)) == pytest.approx(condition1_error(U_hat, U, np.eye(5)))

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            condition1_error(np.ones((3, 1)), np.ones((4, 1)), np.eye(4))
