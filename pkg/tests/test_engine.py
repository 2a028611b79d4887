"""Tests for the certificate optimizers, decay experiment and classifier.

Frozen values below come from independent oracles computed before
engine.py existed:

- closed forms for f = z - 1 by the resistor-chain reduction of the
  least-squares normal equations: a unit source driven through M + 2 (or
  2M + 2) unit links gives value^2 = 1/(M+2) on nonneg support,
  1/(2M+2) on all of Z, and 1 + 1/(M+2) for the shift objective
- IRLS references at p in {1.5, 1.25}, beta = 0.25, degree 8, from a
  dense scipy.optimize run (trust-constr on stacked real coordinates,
  gtol 1e-12) on the same exact finite objective
- the Szego limit exp(mean log |1 - h_3|) = 1/4, exact because 1 - h_3
  is an outer Moebius factor with modulus (1/3)/|z - 4/3|
- decay and kernel-ratio smoke numbers pinned from the first verified
  run of the grid pipeline (middle-thirds depth 8, grids 2^11 and 2^10)
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclab.analytic import h_k, smooth_vanishing_function
from cyclab.engine import (
    CertificateProblem,
    CertificateReport,
    InfimumResult,
    _ConvObjective,
    bicyclicity_infimum,
    certify_cyclic,
    classify_regime,
    forward_shift_infimum,
    lemma_kel_ratio,
    p_epsilon_decay,
    szego_lower_bound,
)
from cyclab.fourier import FourierSeries, SpaceIndex, norm_ap_beta
from cyclab.geometry import cantor_build, middle_thirds_spec

Z_MINUS_1 = FourierSeries({0: -1.0, 1: 1.0})
P15 = SpaceIndex(p=1.5, beta=0.0)
P2 = SpaceIndex(p=2.0, beta=0.0)

# dense trust-constr oracle, f = z - 1, degree 8, nonneg support, beta = 0.25
IRLS_ORACLE = {
    1.5: 6.431092342593e-01,
    1.25: 8.412600353680e-01,
}

# first verified run of the grid pipeline, middle-thirds depth 8
DECAY_NORMS_MT8 = [8.541059312682e-02, 5.709270761867e-02, 4.617453636381e-02]
KEL_RATIOS_MT8 = [1.111035296551e00, 1.279133511561e00]


def random_series(rng, lo, hi, scale=1.0):
    n = np.arange(lo, hi + 1)
    vals = scale * (rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size))
    return FourierSeries.from_dense(vals, lo)


def residual_norm(f, poly, space, target_one):
    """Recompute the certificate norm from the returned polynomial."""
    prod = poly * f
    if target_one:
        r = FourierSeries({0: 1.0}) - prod
    else:
        r = f - prod * FourierSeries({1: 1.0})
    return norm_ap_beta(r, space)


class TestAdjointPair:
    def test_matches_dense_matrix(self):
        rng = np.random.default_rng(7)
        for f_lo, nf, s_lo, s_hi in [(-3, 7, -2, 4), (0, 5, 1, 6), (-1, 4, 0, 0)]:
            f_arr = rng.standard_normal(nf) + 1j * rng.standard_normal(nf)
            prob = _ConvObjective(f_lo, f_arr, s_lo, s_hi, 0, np.ones(1), 1.5, 0.3)
            sqrt_w = np.sqrt(prob.base_w)
            cols = []
            for j in range(prob.n_cols):
                e = np.zeros(prob.n_cols, dtype=complex)
                e[j] = 1.0
                y = np.zeros(prob.n_rows, dtype=complex)
                conv = np.convolve(f_arr, e)
                y[prob.conv_off : prob.conv_off + len(conv)] = conv
                cols.append(sqrt_w * y)
            A = np.stack(cols, axis=1)
            x = rng.standard_normal(prob.n_cols) + 1j * rng.standard_normal(prob.n_cols)
            y = rng.standard_normal(prob.n_rows) + 1j * rng.standard_normal(prob.n_rows)
            lhs = np.vdot(y, sqrt_w * prob.apply(x))
            # rmatvec through the solver path
            def rmatvec(yv):
                yw = np.conj(sqrt_w) * yv
                seg = yw[prob.conv_off : prob.conv_off + nf + prob.n_cols - 1]
                full = np.convolve(np.conj(f_arr[::-1]), seg)
                return full[nf - 1 : nf - 1 + prob.n_cols]

            rhs = np.vdot(rmatvec(y), x)
            assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))
            direct = np.vdot(y, A @ x)
            assert abs(lhs - direct) < 1e-12 * max(1.0, abs(lhs))


class TestClosedForms:
    @pytest.mark.parametrize("M", [0, 1, 8, 50, 200])
    def test_nonneg_support(self, M):
        value, poly = bicyclicity_infimum(Z_MINUS_1, P2, "nonneg", M)
        assert abs(value**2 - 1.0 / (M + 2)) < 1e-10
        assert set(poly.support()) <= set(range(0, M + 1))

    @pytest.mark.parametrize("M", [0, 1, 8, 50, 200])
    def test_two_sided_support(self, M):
        value, _ = bicyclicity_infimum(Z_MINUS_1, P2, "all_integers", M)
        assert abs(value**2 - 1.0 / (2 * M + 2)) < 1e-10

    @pytest.mark.parametrize("M", [0, 1, 8, 50, 200])
    def test_shift_chain(self, M):
        value, poly = forward_shift_infimum(Z_MINUS_1, P2, M)
        assert abs(value**2 - (1.0 + 1.0 / (M + 2))) < 1e-10
        assert set(poly.support()) <= set(range(0, M + 1))

    def test_bicyclic_at_degree_100(self):
        value, _ = bicyclicity_infimum(Z_MINUS_1, P2, "all_integers", 100)
        assert value < 0.15

    def test_f_equal_one(self):
        value, poly = bicyclicity_infimum(FourierSeries({0: 1.0}), P15, "nonneg", 4)
        assert value < 1e-12
        assert abs(poly.coeff(0) - 1.0) < 1e-10
        shift_value, _ = forward_shift_infimum(FourierSeries({0: 1.0}), P15, 12)
        assert abs(shift_value - 1.0) < 1e-12


class TestIrlsAgainstOracle:
    @pytest.mark.parametrize("p", [1.5, 1.25])
    def test_frozen_reference(self, p):
        space = SpaceIndex(p=p, beta=0.25)
        value, _ = bicyclicity_infimum(Z_MINUS_1, space, "nonneg", 8)
        assert abs(value - IRLS_ORACLE[p]) < 1e-6 * IRLS_ORACLE[p]

    def test_p2_exact_and_iterative_agree(self):
        rng = np.random.default_rng(3)
        f = random_series(rng, -2, 3)
        exact_value, _ = bicyclicity_infimum(f, P2, "all_integers", 12)
        # beta > 0 disables the Toeplitz path; beta = 1e-12 is numerically
        # the same objective solved iteratively
        near = SpaceIndex(p=2.0, beta=1e-12)
        iter_value, _ = bicyclicity_infimum(f, near, "all_integers", 12)
        assert abs(exact_value - iter_value) < 1e-8 * max(exact_value, 1e-8)


class TestSolverContract:
    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(0, 6),
        st.sampled_from(["all_integers", "nonneg"]),
        st.sampled_from([1.5, 2.0]),
        st.integers(0, 2**31 - 1),
    )
    def test_value_is_witnessed_by_polynomial(self, degree, support, p, seed):
        rng = np.random.default_rng(seed)
        f = random_series(rng, -2, 2)
        space = SpaceIndex(p=p, beta=0.2)
        res = bicyclicity_infimum(f, space, support, degree)
        recomputed = residual_norm(f, res.polynomial, space, target_one=True)
        assert abs(res.value - recomputed) < 1e-10 * max(1.0, recomputed)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 4), st.integers(0, 2**31 - 1))
    def test_shift_value_is_witnessed(self, degree, seed):
        rng = np.random.default_rng(seed)
        f = random_series(rng, -1, 2)
        res = forward_shift_infimum(f, P15, degree)
        recomputed = residual_norm(f, res.polynomial, P15, target_one=False)
        assert abs(res.value - recomputed) < 1e-10 * max(1.0, recomputed)

    def test_monotone_in_degree_exact_path(self):
        rng = np.random.default_rng(11)
        f = random_series(rng, -3, 3)
        values = [
            bicyclicity_infimum(f, P2, "all_integers", d).value for d in (2, 4, 8, 16)
        ]
        for a, b in zip(values, values[1:]):
            assert b <= a + 1e-12

    def test_monotone_under_warm_start(self):
        rng = np.random.default_rng(13)
        f = random_series(rng, -2, 2)
        prev = bicyclicity_infimum(f, P15, "all_integers", 3)
        for d in (5, 8, 12):
            res = bicyclicity_infimum(f, P15, "all_integers", d, warm=prev.polynomial)
            assert res.value <= prev.value + 1e-12
            prev = res

    def test_shift_warm_start_carries_over(self):
        rng = np.random.default_rng(17)
        f = random_series(rng, 0, 3)
        prev = forward_shift_infimum(f, P15, 2)
        res = forward_shift_infimum(f, P15, 6, warm=prev.polynomial)
        assert res.value <= prev.value + 1e-12

    def test_result_unpacks_as_pair(self):
        res = bicyclicity_infimum(Z_MINUS_1, P2, "nonneg", 3)
        value, poly = res
        assert value == res.value
        assert poly is res.polynomial
        assert isinstance(res, InfimumResult)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            bicyclicity_infimum(Z_MINUS_1, SpaceIndex(p=1.0, beta=0.0), "nonneg", 2)
        with pytest.raises(ValueError):
            bicyclicity_infimum(Z_MINUS_1, SpaceIndex(p=0.7, beta=0.0), "nonneg", 2)
        with pytest.raises(ValueError):
            bicyclicity_infimum(Z_MINUS_1, SpaceIndex(p=2.5, beta=0.0), "nonneg", 2)
        with pytest.raises(ValueError):
            bicyclicity_infimum(Z_MINUS_1, P2, "sideways", 2)
        with pytest.raises(ValueError):
            bicyclicity_infimum(Z_MINUS_1, P2, "nonneg", -1)
        with pytest.raises(ValueError):
            bicyclicity_infimum(FourierSeries({}), P2, "nonneg", 2)


class TestSzegoBound:
    def test_shift_limit_of_outer_moebius_factor(self):
        # |1 - h_3| = (1/3)/|z - 4/3| has log-mean log(1/4), an exact limit
        f = FourierSeries({0: 1.0}) - h_k(3, 120).series
        value, _ = forward_shift_infimum(f, P2, 200)
        assert abs(value - 0.25) < 1e-3
        assert abs(szego_lower_bound(f) - 0.25) < 1e-6

    def test_shift_never_beats_the_bound(self):
        rng = np.random.default_rng(5)
        for _ in range(5):
            f = random_series(rng, 0, 3) + FourierSeries({0: 4.0})
            bound = szego_lower_bound(f)
            value, _ = forward_shift_infimum(f, P2, 48)
            assert value >= bound - 1e-8 * bound

    def test_constant(self):
        assert abs(szego_lower_bound(FourierSeries({0: 2.0})) - 2.0) < 1e-12


class TestCertify:
    def test_constant_one_is_bicyclic_only(self):
        rep = certify_cyclic(
            CertificateProblem(f=FourierSeries({0: 1.0}), space=P15, degree_budget=64)
        )
        assert rep.verdict == "bicyclic_only"
        assert rep.achieved_bicyclic_norm < 1e-12
        assert abs(rep.achieved_shift_norm - 1.0) < 1e-12
        assert abs(rep.szego_bound - 1.0) < 1e-12

    def test_z_minus_1_keeps_shift_above_szego(self):
        rep = certify_cyclic(
            CertificateProblem(
                f=Z_MINUS_1, space=P15, degree_budget=256, epsilon_target=0.5
            )
        )
        assert rep.verdict == "bicyclic_only"
        assert abs(rep.achieved_bicyclic_norm - 0.19740230) < 1e-4
        assert abs(rep.achieved_shift_norm - 1.04108569) < 1e-4
        assert abs(rep.szego_bound - 1.00203326) < 1e-4
        assert rep.achieved_shift_norm >= rep.szego_bound - 1e-8

    def test_certified_branch_on_scaled_input(self):
        # the shift norm scales linearly with f, so a small multiple of a
        # bicyclic vector drives both norms under the target; this checks
        # the verdict logic, not a cyclicity claim
        rep = certify_cyclic(
            CertificateProblem(
                f=Z_MINUS_1 * 0.1, space=P15, degree_budget=256, epsilon_target=0.25
            )
        )
        assert rep.verdict == "certified"
        assert rep.achieved_bicyclic_norm < 0.25
        assert rep.achieved_shift_norm < 0.25

    def test_verdict_matches_norms(self):
        for f, budget, eps in [
            (FourierSeries({0: 1.0}), 32, 0.5),
            (Z_MINUS_1, 64, 0.5),
            (Z_MINUS_1 * 0.1, 64, 0.25),
        ]:
            rep = certify_cyclic(
                CertificateProblem(f=f, space=P15, degree_budget=budget, epsilon_target=eps)
            )
            both = (
                rep.achieved_bicyclic_norm < eps and rep.achieved_shift_norm < eps
            )
            assert (rep.verdict == "certified") == both

    def test_report_reevaluates_from_stored_polynomials(self):
        rep = certify_cyclic(
            CertificateProblem(
                f=Z_MINUS_1, space=P15, degree_budget=128, epsilon_target=0.5
            )
        )
        re_b = residual_norm(Z_MINUS_1, rep.best_p, P15, target_one=True)
        re_s = residual_norm(Z_MINUS_1, rep.best_q, P15, target_one=False)
        assert abs(re_b - rep.achieved_bicyclic_norm) < 1e-10
        assert abs(re_s - rep.achieved_shift_norm) < 1e-10

    def test_trace_is_monotone(self):
        rep = certify_cyclic(
            CertificateProblem(
                f=Z_MINUS_1, space=P15, degree_budget=256, epsilon_target=1e-6
            )
        )
        bs = [row["bicyclic_norm"] for row in rep.solver_trace]
        ss = [row["shift_norm"] for row in rep.solver_trace]
        assert all(b2 <= b1 + 1e-12 for b1, b2 in zip(bs, bs[1:]))
        assert all(s2 <= s1 + 1e-12 for s1, s2 in zip(ss, ss[1:]))

    def test_report_round_trips_to_json(self):
        rep = certify_cyclic(
            CertificateProblem(f=Z_MINUS_1, space=P15, degree_budget=64)
        )
        obj = rep.to_json_obj()
        assert obj["verdict"] == rep.verdict
        assert obj["best_p"] is not None
        restored = FourierSeries.from_json(obj["best_p"])
        assert restored.support() == rep.best_p.support()

    def test_problem_validation(self):
        with pytest.raises(ValueError):
            CertificateProblem(f=Z_MINUS_1, space=SpaceIndex(p=1.5, beta=0.5))
        with pytest.raises(ValueError):
            CertificateProblem(f=Z_MINUS_1, space=P15, degree_budget=-1)
        with pytest.raises(ValueError):
            CertificateProblem(f=Z_MINUS_1, space=P15, epsilon_target=0.0)
        with pytest.raises(ValueError):
            CertificateProblem(f=Z_MINUS_1, space=P15, support="diag")
        with pytest.raises(ValueError):
            CertificateProblem(f=FourierSeries({}), space=P15)


@pytest.fixture(scope="module")
def carleson_setup():
    E = cantor_build(middle_thirds_spec(8))
    G = 2**11
    f = smooth_vanishing_function(E, 1.0, G).series
    return E, f, G


class TestDecayExperiment:
    def test_carleson_set_stalls(self, carleson_setup):
        E, f, G = carleson_setup
        rep = p_epsilon_decay(f, E, 1.0, P15, [1e-1, 1e-2, 1e-3], G=G)
        assert rep.verdict == "stalls"
        norms = [row[2] for row in rep.schedule]
        for got, want in zip(norms, DECAY_NORMS_MT8):
            assert abs(got - want) < 1e-6 * want
        assert all(r > 0.0 and math.isfinite(r) for r in rep.normalized_ratios)

    def test_refinement_stability(self, carleson_setup):
        E, f, G = carleson_setup
        coarse = p_epsilon_decay(f, E, 1.0, P15, [1e-1, 1e-2], G=G, truncation=G // 4)
        f2 = smooth_vanishing_function(E, 1.0, 2 * G).series
        fine = p_epsilon_decay(f2, E, 1.0, P15, [1e-1, 1e-2], G=2 * G, truncation=G // 4)
        for a, b in zip(coarse.schedule, fine.schedule):
            assert abs(a[2] - b[2]) < 1e-3 * a[2]

    def test_rejects_nonvanishing_f(self, carleson_setup):
        E, _, G = carleson_setup
        with pytest.raises(ValueError, match="vanish"):
            p_epsilon_decay(FourierSeries({0: 1.0}), E, 1.0, P15, [1e-1, 1e-2], G=G)

    def test_rejects_bad_schedules(self, carleson_setup):
        E, f, G = carleson_setup
        with pytest.raises(ValueError):
            p_epsilon_decay(f, E, 1.0, P15, [1e-1], G=G)
        with pytest.raises(ValueError):
            p_epsilon_decay(f, E, 1.0, P15, [1e-2, 1e-1], G=G)
        with pytest.raises(ValueError):
            p_epsilon_decay(f, E, -1.0, P15, [1e-1, 1e-2], G=G)

    def test_json_shape(self, carleson_setup):
        E, f, G = carleson_setup
        rep = p_epsilon_decay(f, E, 1.0, P15, [1e-1, 1e-2], G=G)
        obj = rep.to_json_obj()
        assert len(obj["schedule"]) == 2
        assert obj["grid_size"] == G
        assert obj["verdict"] in ("decays", "stalls")


class TestKernelRatio:
    def test_frozen_smoke_values(self):
        E = cantor_build(middle_thirds_spec(8))
        got = lemma_kel_ratio(E, 1.0, 1.2, [1e-1, 1e-2], 2**10)
        for g, want in zip(got, KEL_RATIOS_MT8):
            assert abs(g - want) < 1e-6 * want

    def test_grid_doubling_is_stable(self):
        E = cantor_build(middle_thirds_spec(8))
        a = lemma_kel_ratio(E, 1.0, 1.2, [1e-1], 2**10)[0]
        b = lemma_kel_ratio(E, 1.0, 1.2, [1e-1], 2**11)[0]
        assert abs(a - b) < 0.05 * a

    def test_hypothesis_guard(self):
        E = cantor_build(middle_thirds_spec(8))
        with pytest.raises(ValueError, match="2\\*delta"):
            lemma_kel_ratio(E, 1.0, 0.9, [1e-1], 2**10)

    def test_large_eps_rejected_when_mean_negative(self):
        E = cantor_build(middle_thirds_spec(8))
        # at eps = 10 the half log-integral is negative; the ratio is undefined
        with pytest.raises(ValueError, match="eps too large"):
            lemma_kel_ratio(E, 1.0, 1.2, [10.0], 2**10)

    def test_grid_validation(self):
        E = cantor_build(middle_thirds_spec(8))
        with pytest.raises(ValueError):
            lemma_kel_ratio(E, 1.0, 1.2, [1e-1], 1000)


class TestClassifier:
    def test_algebra_exclusion(self):
        # q = 3 at p = 1.5, so beta = 0.4 gives beta*q = 1.2 > 1
        got = classify_regime(0.0, SpaceIndex(p=1.5, beta=0.4), "c_infty", True, True)
        assert got == "no_cyclic_vectors"

    def test_dimension_obstruction(self):
        got = classify_regime(0.9, SpaceIndex(p=1.5, beta=0.1), "c_infty", True, True)
        assert got == "not_cyclic"

    def test_smooth_sufficient_branch(self):
        got = classify_regime(0.3, SpaceIndex(p=1.5, beta=0.0), "c_infty", True, False)
        assert got == "cyclic_sufficient"

    def test_smooth_needs_divergence(self):
        got = classify_regime(0.3, SpaceIndex(p=1.5, beta=0.0), "c_infty", False, False)
        assert got == "indeterminate"

    def test_lipschitz_branch(self):
        space = SpaceIndex(p=2.0, beta=0.0)
        got = classify_regime(0.5, space, ("lip_delta", 0.4), False, True)
        assert got == "cyclic_sufficient"
        got = classify_regime(0.5, space, ("lip_delta", 0.4), False, False)
        assert got == "indeterminate"
        # delta at the threshold beta + 1/p - 1/2 = 0 is not enough
        got = classify_regime(0.5, space, ("lip_delta", 0.0), False, True)
        assert got == "indeterminate"

    def test_list_form_matches_tuple_form(self):
        space = SpaceIndex(p=2.0, beta=0.0)
        assert classify_regime(
            0.5, space, ["lip_delta", 0.4], False, True
        ) == classify_regime(0.5, space, ("lip_delta", 0.4), False, True)

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            classify_regime(0.5, SpaceIndex(p=1.0, beta=0.0), "c_infty", True, True)
        with pytest.raises(ValueError):
            classify_regime(1.5, P2, "c_infty", True, True)
        with pytest.raises(ValueError):
            classify_regime(0.5, P2, "smoothish", True, True)

    @settings(max_examples=120, deadline=None)
    @given(
        st.floats(0.0, 1.0),
        st.floats(1.01, 2.0),
        st.floats(0.0, 0.6),
        st.booleans(),
        st.booleans(),
        st.booleans(),
        st.floats(0.0, 1.0),
    )
    def test_verdict_consistency(self, dim, p, beta, smooth, flag_a, flag_b, delta):
        space = SpaceIndex(p=p, beta=beta)
        smoothness = "c_infty" if smooth else ("lip_delta", delta)
        got = classify_regime(dim, space, smoothness, flag_a, flag_b)
        q = p / (p - 1.0)
        bq = beta * q
        if bq > 1.0:
            assert got == "no_cyclic_vectors"
        elif dim > 1.0 - bq:
            assert got == "not_cyclic"
        elif got == "cyclic_sufficient":
            assert dim < 2.0 * (1.0 - bq) / q
            if smooth:
                assert flag_a
            else:
                assert flag_b and delta > beta + 1.0 / p - 0.5
        else:
            assert got == "indeterminate"
