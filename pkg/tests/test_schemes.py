import math

import numpy as np
import pytest

from qsdkit import (
    INCONCLUSIVE,
    DecodeError,
    ProblemSpec,
    PureState,
    brute_force_qubit_povm,
    build_med,
    confidences,
    decode_povm,
    density_of,
    depolarize,
    joint_distribution,
    make_benchmark_two_qubit_states,
    make_single_qubit_pair,
    outcome_stats,
    scheme_value,
    solve,
    solve_scheme,
    uqsd_reference,
)
from qsdkit.solver import Solution
from conftest import random_problem

HELSTROM_ZERO_PLUS = 0.5 * (1.0 + 1.0 / math.sqrt(2.0))
UQSD_ZERO_PLUS = 1.0 - 1.0 / math.sqrt(2.0)


def zero_plus_spec(lam=0.0):
    return ProblemSpec.from_states(make_single_qubit_pair(), noise_lambda=lam)


def bench2q_spec(lam=0.0):
    return ProblemSpec.from_states(make_benchmark_two_qubit_states((0.2, 0.5, 0.7)),
                                   noise_lambda=lam)


def orthogonal_pair():
    return ProblemSpec.from_states([PureState(np.array([1.0, 0.0])),
                                    PureState(np.array([0.0, 1.0]))])


class TestMed:
    def test_orthogonal_states(self):
        assert solve_scheme(orthogonal_pair(), "med").value == pytest.approx(1.0, abs=1e-7)

    def test_zero_plus_matches_bloch_scan(self):
        res = solve_scheme(zero_plus_spec(), "med")
        assert res.value == pytest.approx(HELSTROM_ZERO_PLUS, abs=1e-7)
        scan = brute_force_qubit_povm(zero_plus_spec(), "med", grid=200)
        assert res.value >= scan - 1e-6

    def test_benchmark_two_qubit_conditionals(self):
        spec = bench2q_spec()
        res = solve_scheme(spec, "med")
        jd = joint_distribution(spec, res.povm, 0.0)
        cond = [jd.entries[i, i] / spec.priors[i] for i in range(3)]
        np.testing.assert_allclose(cond, [0.99547, 0.98188, 0.98059], atol=1e-3)

    def test_decoded_povm_is_valid(self, rng):
        res = solve_scheme(random_problem(rng), "med")
        assert res.povm.num_conclusive == res.scheme.num_states


class TestMedPlus:
    def test_matches_med_and_kills_inconclusive(self, rng):
        for _ in range(8):
            spec = random_problem(rng)
            med = solve_scheme(spec, "med")
            plus = solve_scheme(spec, "med_plus")
            assert abs(med.value - plus.value) <= 1e-5
            assert float(np.trace(plus.povm.element(INCONCLUSIVE)).real) <= 1e-3

    def test_orthogonal_states(self):
        res = solve_scheme(orthogonal_pair(), "med_plus")
        assert res.value == pytest.approx(1.0, abs=1e-7)
        assert np.linalg.norm(res.povm.element(INCONCLUSIVE)) < 1e-6


class TestUqsd:
    def test_zero_plus(self):
        res = solve_scheme(zero_plus_spec(), "uqsd")
        assert res.value == pytest.approx(UQSD_ZERO_PLUS, abs=1e-7)
        # Conclusive outcomes never misidentify.
        jd = joint_distribution(zero_plus_spec(), res.povm, 0.0)
        assert jd.entries[0, 1] < 1e-9
        assert jd.entries[1, 0] < 1e-9

    def test_identical_full_rank_states(self, rng):
        rho = depolarize(density_of(make_single_qubit_pair()[0]), 0.3)
        spec = ProblemSpec((rho, rho), np.array([0.5, 0.5]))
        res = solve_scheme(spec, "uqsd")
        assert res.value == pytest.approx(0.0, abs=1e-9)
        np.testing.assert_allclose(res.povm.element(INCONCLUSIVE), np.eye(2), atol=1e-9)

    def test_orthogonal_states(self):
        res = solve_scheme(orthogonal_pair(), "uqsd")
        assert res.value == pytest.approx(1.0, abs=1e-7)

    def test_noisy_states_force_all_inconclusive(self, rng):
        spec = zero_plus_spec(lam=0.05)
        res = solve_scheme(spec, "uqsd")
        assert res.value == pytest.approx(0.0, abs=1e-9)


class TestFrio:
    def test_rate_zero_reduces_to_med(self):
        spec = zero_plus_spec()
        frio = solve_scheme(spec, "frio", rate=0.0)
        assert frio.value == pytest.approx(HELSTROM_ZERO_PLUS, abs=1e-6)

    def test_rate_one_forces_inconclusive(self):
        spec = zero_plus_spec()
        res = solve_scheme(spec, "frio", rate=1.0)
        assert res.value == pytest.approx(0.0, abs=1e-7)
        np.testing.assert_allclose(res.povm.element(INCONCLUSIVE), np.eye(2), atol=1e-5)

    def test_half_rate_against_grid_search(self):
        spec = zero_plus_spec()
        res = solve_scheme(spec, "frio", rate=0.5)
        scan = brute_force_qubit_povm(spec, "frio", grid=60, rate=0.5)
        assert scan <= res.value + 1e-6
        # The inconclusive rate constraint holds on the decoded POVM.
        jd = joint_distribution(spec, res.povm, 0.0)
        assert outcome_stats(jd).p_inc >= 0.5 - 1e-6

    @pytest.mark.parametrize("lam,rate,p_succ,p_err", [
        (0.0, 0.1, 0.782, 0.118),
        (0.0, 0.5, 0.478, 0.022),
        (0.1, 0.4, 0.527, 0.073),
    ])
    def test_rate_sweep_reference_values_pair(self, lam, rate, p_succ, p_err):
        # Frozen reference values for the |0>,|+> ensemble at matched
        # construction/evaluation noise (three-decimal precision).
        spec = zero_plus_spec(lam=lam)
        res = solve_scheme(spec, "frio", rate=rate)
        stats = outcome_stats(joint_distribution(spec, res.povm, lam))
        assert stats.p_succ == pytest.approx(p_succ, abs=5e-4)
        assert stats.p_err == pytest.approx(p_err, abs=5e-4)

    @pytest.mark.parametrize("rate,p_succ,p_err", [
        (0.1, 0.897, 0.003),
        (0.2, 0.800, 0.000),
    ])
    def test_rate_sweep_reference_values_bench2q(self, rate, p_succ, p_err):
        spec = bench2q_spec()
        res = solve_scheme(spec, "frio", rate=rate)
        stats = outcome_stats(joint_distribution(spec, res.povm, 0.0))
        assert stats.p_succ == pytest.approx(p_succ, abs=5e-4)
        assert stats.p_err == pytest.approx(p_err, abs=5e-4)


class TestCrossQsd:
    def test_vacuous_bounds_reduce_to_med(self):
        spec = bench2q_spec()
        med = solve_scheme(spec, "med")
        cross = solve_scheme(spec, "crossqsd", alpha=np.ones(3), beta=np.ones(3))
        assert abs(cross.value - med.value) <= 1e-5

    def test_confidence_bounds_hold(self):
        spec = bench2q_spec(lam=0.01)
        alpha = np.full(3, 0.05)
        beta = np.full(3, 0.05)
        res = solve_scheme(spec, "crossqsd", alpha=alpha, beta=beta)
        given_state, given_outcome = confidences(spec, res.povm, 0.01)
        assert np.all(given_state >= 1.0 - alpha - 1e-5)
        assert np.all(given_outcome >= 1.0 - beta - 1e-5)

    def test_unreachable_posterior_bound_goes_inconclusive(self):
        # Overlapping states cannot reach a 99.9% posterior, so the only
        # feasible measurements have (numerically) zero conclusive mass; the
        # confidence constraints are then vacuous and everything lands in
        # the inconclusive outcome.
        from qsdkit import make_coherent_state

        alphas = [1.0, np.exp(-1j * np.pi / 3.0), np.exp(-2j * np.pi / 3.0)]
        spec = ProblemSpec.from_states([make_coherent_state(a, 3) for a in alphas],
                                       noise_lambda=0.01)
        res = solve_scheme(spec, "crossqsd", alpha=np.full(3, 0.2),
                           beta=np.full(3, 1e-3))
        jd = joint_distribution(spec, res.povm, 0.01)
        stats = outcome_stats(jd)
        assert stats.p_succ <= 1e-6
        assert stats.p_inc >= 1.0 - 1e-6
        # Confidence bounds are only meaningful above the conditioning-mass
        # floor; nothing exceeds it here.
        assert float(jd.entries[:, :3].sum()) <= 1e-8 * 3

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            solve_scheme(zero_plus_spec(), "crossqsd", alpha=np.array([0.5]),
                         beta=np.array([0.5, 0.5]))


class TestFitSchemes:
    def test_minl1_recovers_achievable_reference(self):
        spec = bench2q_spec()
        ref = uqsd_reference(spec)
        res = solve_scheme(spec, "minl1", reference=ref)
        assert res.value <= 1e-6
        jd = joint_distribution(spec, res.povm, 0.0)
        assert float(np.abs(jd.entries - ref.entries).sum()) <= 1e-6

    def test_minl1_objective_self_consistent_under_noise(self):
        spec = bench2q_spec(lam=0.01)
        ref = uqsd_reference(spec)
        res = solve_scheme(spec, "minl1", reference=ref)
        jd = joint_distribution(spec, res.povm, 0.01)
        recomputed = float(np.abs(jd.entries - ref.entries).sum())
        assert res.value >= -1e-9
        assert abs(res.value - recomputed) <= 1e-6

    def test_minss_nonnegative_and_bounded(self):
        spec = bench2q_spec(lam=0.01)
        ref = uqsd_reference(spec)
        l1 = solve_scheme(spec, "minl1", reference=ref)
        ss = solve_scheme(spec, "minss", reference=ref)
        assert ss.value >= -1e-9
        assert l1.value >= -1e-9
        max_dev = float(np.abs(joint_distribution(spec, l1.povm, 0.01).entries
                               - ref.entries).max())
        assert l1.value <= 12 * (max_dev + 1e-9)

    def test_meco_matches_uqsd_noiseless(self):
        spec = bench2q_spec()
        ref = uqsd_reference(spec)
        uqsd = solve_scheme(spec, "uqsd")
        meco = solve_scheme(spec, "meco", reference=ref)
        assert meco.value == pytest.approx(uqsd.value, abs=1e-6)
        jd = joint_distribution(spec, meco.povm, 0.0)
        np.testing.assert_allclose(np.diag(jd.entries[:, :3]),
                                   np.diag(ref.entries[:, :3]), atol=1e-6)

    def test_meco_near_minl1_under_small_noise(self):
        spec = bench2q_spec(lam=1e-3)
        ref = uqsd_reference(spec)
        l1 = solve_scheme(spec, "minl1", reference=ref)
        meco = solve_scheme(spec, "meco", reference=ref)
        ps_l1 = outcome_stats(joint_distribution(spec, l1.povm, 1e-3)).p_succ
        ps_meco = outcome_stats(joint_distribution(spec, meco.povm, 1e-3)).p_succ
        assert abs(ps_l1 - ps_meco) <= 1e-3

    def test_meco_zero_offdiagonal_reference_feasible(self):
        spec = bench2q_spec(lam=1e-3)
        ref = uqsd_reference(spec)  # off-diagonal conclusive entries are zero
        res = solve_scheme(spec, "meco", reference=ref)
        assert res.value <= float(np.trace(ref.entries[:, :3])) + 1e-6

    def test_meco_impossible_reference_surfaces_infeasibility(self):
        # This reference demands Tr(rho_0' Pi_1) >= 0.9 and
        # Tr(rho_0' Pi_2) >= 0.45, exceeding the row budget Tr(rho_0') = 1,
        # so no POVM satisfies it.
        from qsdkit import JointDistribution, build_fit_meco, decode_povm, solve
        from qsdkit.solver import INFEASIBLE

        ref = JointDistribution(np.array([
            [0.0, 0.30, 0.15, 0.05],
            [0.30, 0.0, 0.0, 0.05],
            [0.15, 0.0, 0.0, 0.0],
        ]))
        scheme = build_fit_meco(bench2q_spec(lam=1e-3), ref)
        solution = solve(scheme.program, tol=1e-8, max_iters=40_000)
        assert solution.status == INFEASIBLE
        with pytest.raises(DecodeError):
            decode_povm(scheme, solution)


class TestHybrid:
    def test_w_zero_equals_med(self):
        spec = bench2q_spec(lam=1e-3)
        ref = uqsd_reference(spec)
        med = solve_scheme(spec, "med")
        hyb = solve_scheme(spec, "hybrid", w=0.0, ell=1, reference=ref)
        assert abs(hyb.value - med.value) <= 1e-5

    def test_large_w_pins_reference(self):
        spec = bench2q_spec()
        ref = uqsd_reference(spec)
        hyb = solve_scheme(spec, "hybrid", w=1e4, ell=1, reference=ref)
        jd = joint_distribution(spec, hyb.povm, 0.0)
        assert float(np.abs(jd.entries - ref.entries).sum()) <= 1e-4

    def test_tradeoff_monotone(self):
        spec = bench2q_spec(lam=1e-3)
        ref = uqsd_reference(spec)
        rows = []
        for w in (0.0, 0.2, 1.0):
            res = solve_scheme(spec, "hybrid", w=w, ell=1, reference=ref)
            jd = joint_distribution(spec, res.povm, 1e-3)
            rows.append((outcome_stats(jd).p_succ,
                         float(np.abs(jd.entries - ref.entries).sum())))
        for a, b in zip(rows, rows[1:]):
            assert a[0] >= b[0] - 2e-8
            assert a[1] >= b[1] - 2e-8


class TestDecode:
    def test_exact_blocks_unchanged(self):
        spec = orthogonal_pair()
        scheme = build_med(spec)
        solution = solve(scheme.program)
        povm = decode_povm(scheme, solution)
        total = sum(povm.elements)
        np.testing.assert_allclose(total, np.eye(2), atol=1e-12)
        redecoded = decode_povm(scheme, solution)
        for a, b in zip(povm.elements, redecoded.elements):
            np.testing.assert_allclose(a, b, atol=1e-15)

    def test_noisy_blocks_are_cleaned(self, rng):
        # Perturb an exact solution by 1e-9 noise; decode restores exact
        # completeness and PSD elements.
        spec = orthogonal_pair()
        scheme = build_med(spec)
        solution = solve(scheme.program)
        noisy = solution.x + 1e-9 * rng.standard_normal(solution.x.size)
        perturbed = Solution(x=noisy, status=solution.status,
                             primal_residual=solution.primal_residual,
                             dual_residual=solution.dual_residual,
                             objective=solution.objective,
                             iterations=solution.iterations)
        povm = decode_povm(scheme, perturbed)
        np.testing.assert_allclose(sum(povm.elements), np.eye(2), atol=1e-10)
        for e in povm.elements:
            assert np.linalg.eigvalsh(e)[0] > -1e-12

    def test_unconverged_rejected(self):
        spec = orthogonal_pair()
        scheme = build_med(spec)
        solution = solve(scheme.program)
        garbage = Solution(x=solution.x * 3.0, status="optimal",
                           primal_residual=0.0, dual_residual=0.0,
                           objective=0.0, iterations=1)
        with pytest.raises(DecodeError):
            decode_povm(scheme, garbage)

    def test_scheme_value_sign(self):
        spec = orthogonal_pair()
        scheme = build_med(spec)
        solution = solve(scheme.program)
        assert scheme_value(scheme, solution) == pytest.approx(-solution.objective)


class TestOracleBounds:
    def test_med_value_between_oracle_bounds(self, rng):
        from qsdkit import helstrom_two_state
        for _ in range(10):
            spec = random_problem(rng, k=2, dim=2)
            med = solve_scheme(spec, "med")
            r1, r2 = spec.noisy_states()
            hel = helstrom_two_state(r1, r2, float(spec.priors[0]))
            assert med.value <= hel + 1e-6
            assert med.value >= hel - 1e-6
