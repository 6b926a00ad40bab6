import random
from fractions import Fraction as F

import pytest

import nefcert as nc
from nefcert.errors import (
    AmbientMismatch,
    ConcreteOnly,
    FamilyFormatError,
    InvalidCoefficients,
    ShapeNotFunctorial,
    UnequalTauCoefficients,
)
from helpers import random_family_batch


def diagonal_family():
    return nc.FamilyModel.concrete(nc.make_weights(5, 0, 2), (), (0, 0, 0, 0, 2))


def stable_model():
    steps = tuple(nc.BlowdownStep.concrete({i, 5}) for i in range(1, 5))
    return nc.FamilyModel.concrete(nc.make_weights(5, 0, 1), steps, (0, 0, 0, 0, 2))


class TestValidate:
    def test_single_step_below_stability(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(5, 0, 2), [(2, 0)])
        violations = nc.validate_family(fam)
        assert len(violations) == 1 and "steps[0]" in violations[0]
        assert "not > 1" in violations[0]

    def test_complement_failure(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(5, 0, 2), [(3, 0)])
        violations = nc.validate_family(fam)
        assert len(violations) == 1 and "complement" in violations[0]

    def test_parity_violation(self):
        fam = nc.FamilyModel.concrete(nc.make_weights(3, 1, 2), (), (0, 0, 1), (0,))
        violations = nc.validate_family(fam)
        assert any("parity" in v for v in violations)

    def test_tau_disjointness_violation(self):
        # a heavy section crossing a light one at level 0
        fam = nc.FamilyModel.concrete(nc.make_weights(3, 1, 2), (), (2, 0, 0), (0,))
        violations = nc.validate_family(fam)
        assert any("tau[1]" in v and "disjoint" in v for v in violations)

    def test_negative_light_crossing(self):
        step = nc.BlowdownStep.concrete({1, 2, 3})
        fam = nc.FamilyModel.concrete(nc.make_weights(7, 0, 2), (step,), (0,) * 7)
        violations = nc.validate_family(fam)
        assert any("negative" in v for v in violations)

    def test_out_of_range_counts(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(5, 0, 2), [(6, 0)])
        assert any("out of range" in v for v in nc.validate_family(fam))

    def test_good_families(self):
        assert nc.validate_family(diagonal_family()) == []
        assert nc.validate_family(stable_model()) == []


class TestLevelMatrix:
    def test_diagonal_family_level_zero(self):
        matrix = nc.level_matrix(diagonal_family(), 0)
        assert [matrix[i][i] for i in range(5)] == [0, 0, 0, 0, 2]
        for i in range(4):
            assert matrix[i][4] == 1
            for j in range(i + 1, 4):
                assert matrix[i][j] == 0

    def test_stable_model_level_zero(self):
        matrix = nc.level_matrix(stable_model(), 0)
        assert [matrix[i][i] for i in range(5)] == [-1, -1, -1, -1, -2]
        for i in range(5):
            for j in range(i + 1, 5):
                assert matrix[i][j] == 0

    def test_terminal_difference_squares_vanish(self):
        fam = stable_model()
        matrix = nc.level_matrix(fam, fam.n_steps)
        for i in range(5):
            for j in range(5):
                assert matrix[i][i] + matrix[j][j] - 2 * matrix[i][j] == 0

    def test_concrete_only(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(5, 0, 1), [(2, 0)])
        with pytest.raises(ConcreteOnly):
            nc.level_matrix(fam, 0)

    def test_mixed_parity_rejected(self):
        fam = nc.FamilyModel.concrete(nc.make_weights(3, 1, 2), (), (0, 0, 1), (0,))
        with pytest.raises(ValueError):
            nc.level_matrix(fam, 0)


class TestIntersectionNumbers:
    def test_diagonal_family(self):
        report = nc.intersection_numbers(diagonal_family())
        assert (report.psi_sigma_B, report.delta_s_B, report.delta_B) == (-2, 4, 0)
        assert report.boundary_counts == {}

    def test_stable_model(self):
        report = nc.intersection_numbers(stable_model())
        assert (report.psi_sigma_B, report.delta_s_B, report.delta_B) == (6, 0, 4)
        assert report.boundary_counts == {nc.BoundaryKey(2, 0): 4}

    def test_trivial_product_family(self):
        fam = nc.FamilyModel.concrete(nc.make_weights(5, 0, 2), (), (0,) * 5)
        report = nc.intersection_numbers(fam)
        assert (report.psi_sigma_B, report.psi_tau_B, report.delta_s_B,
                report.delta_B) == (0, 0, 0, 0)

    def test_equal_terminal_data(self):
        # all self-intersections e: collisions total n(n-1)e/2
        fam = nc.FamilyModel.concrete(nc.make_weights(5, 0, 2), (), (2,) * 5)
        report = nc.intersection_numbers(fam)
        assert report.psi_sigma_B == -10
        assert report.delta_s_B == F(5 * 4 * 2, 2)
        assert report.delta_B == 0

    def test_step_count_equals_delta(self):
        for fam in random_family_batch(5150, 40):
            report = nc.intersection_numbers(fam)
            assert report.delta_B == fam.n_steps
            assert sum(report.boundary_counts.values()) == fam.n_steps


class TestFValues:
    def test_stable_model_level_zero(self):
        assert nc.f_values(stable_model(), 0) == (4, 6, 0, 0)

    def test_terminal_level_vanishes(self):
        for fam in (diagonal_family(), stable_model()):
            assert nc.f_values(fam, fam.n_steps) == (0, 0, 0, 0)

    def test_single_step_drop(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(4, 0, 1), [(2, 0)])
        hi = nc.f_values(fam, 1)
        lo = nc.f_values(fam, 0)
        assert lo[1] - hi[1] == F(4, 3)  # 2*2/3

    def test_degenerate_conventions(self):
        # one light section: the light potential is an empty pair sum
        fam = nc.FamilyModel.concrete(nc.make_weights(1, 2, 2), (), (0,), (0, 0))
        assert nc.f_values(fam, 0) == (0, 0, 0, 0)
        # no heavy sections: tau and mixed potentials vanish
        assert nc.f_values(diagonal_family(), 0)[2:] == (0, 0)


class TestEvaluate:
    def test_ray_on_stable_model(self):
        fam = stable_model()
        for c in (F(2, 3), F(3, 4), F(1, 2)):
            cls = nc.dk_class(nc.make_weights(5, 0, 1), c)
            assert nc.evaluate_class(cls, fam) == 6 * c - 4
        assert nc.evaluate_class(nc.dk_class(fam.weights, F(2, 3)), fam) == 0

    def test_ray_on_diagonal_family(self):
        fam = diagonal_family()
        for c in (F(2, 3), F(7, 10)):
            cls = nc.dk_class(fam.weights, c)
            assert nc.evaluate_class(cls, fam) == 6 * c - 4

    def test_zero_class(self):
        assert nc.evaluate_class(nc.zero_class(nc.make_weights(5, 0, 2)),
                                 diagonal_family()) == 0

    def test_boundary_coefficients_pair_with_counts(self):
        fam = stable_model()
        key = nc.canonical_boundary_key(fam.weights, 2, 0)
        cls = nc.DivisorClass(fam.weights, 0, (), 0, 0, {key: F(1, 2)})
        assert nc.evaluate_class(cls, fam) == 2

    def test_ambient_mismatch(self):
        with pytest.raises(AmbientMismatch):
            nc.evaluate_class(nc.dk_class(nc.make_weights(6, 0, 2), 1),
                              diagonal_family())

    def test_unequal_tau_entries(self):
        w = nc.make_weights(3, 2, 2)
        fam = nc.FamilyModel.concrete(w, (), (0, 0, 0), (0, 0))
        cls = nc.DivisorClass(w, 0, (F(1), F(2)), 0, 0, {})
        with pytest.raises(UnequalTauCoefficients):
            nc.evaluate_class(cls, fam)


class TestCombinationValue:
    def test_empty_family(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(4, 1, 3), [])
        assert nc.combination_value(fam, F(1, 2), F(1)) == 0

    def test_single_mixed_step(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(3, 2, 2), [(1, 1)])
        for a in (F(1, 8), F(2, 5)):
            for b in (F(3, 2), F(9, 8)):
                assert nc.combination_value(fam, a, b) == a

    def test_stable_model(self):
        assert nc.combination_value(stable_model(), F(3, 4), 0) == F(1, 2)

    def test_b_requires_heavy_sections(self):
        with pytest.raises(InvalidCoefficients):
            nc.combination_value(stable_model(), F(3, 4), F(1))

    def test_matches_direct_pairing_on_concrete_families(self):
        # (a + b/n) psi_sigma + 2a/(n-1) delta_s + b_eff psi_tau - delta,
        # where the heavy coefficient is b at m = 1 and 1 at m >= 2
        rng = random.Random(99)
        for fam in random_family_batch(77, 60):
            w = fam.weights
            if w.n < 2:
                continue
            a = F(rng.randint(-8, 8), rng.randint(1, 6))
            b = F(rng.randint(-8, 8), rng.randint(1, 6)) if w.m else F(0)
            report = nc.intersection_numbers(fam)
            heavy = b if w.m == 1 else F(1)
            direct = ((a + b / w.n) * report.psi_sigma_B
                      + 2 * a / (w.n - 1) * report.delta_s_B
                      + heavy * report.psi_tau_B - report.delta_B)
            assert nc.combination_value(fam, a, b) == direct


class TestStratified:
    def test_two_component_contracted_curve(self):
        for k in range(2, 11):
            n = 2 * k + 1
            parts = nc.pullback_test_curve(n, 0, k)
            cls = nc.dk_class(nc.make_weights(n, 0, k - 1), F(k + 1, 2 * k))
            assert nc.stratified_evaluate(cls, parts) == 0

    def test_moving_component_formula(self):
        # on the blown-up-plane factor alone the pairing is
        # -ck + (2c-1) k(k-1)/2 + 1
        for k in range(2, 8):
            moving, fam = nc.pullback_test_curve(2 * k + 1, 0, k)[0]
            for c in (F(1, 2), F(k + 1, 2 * k), F(3, 4)):
                cls = nc.dk_class(moving, c)
                expected = -c * k + (2 * c - 1) * F(k * (k - 1), 2) + 1
                assert nc.stratified_evaluate(cls, [(moving, fam)]) == expected
                assert nc.evaluate_class(cls, fam) == expected

    def test_additivity_on_disjoint_copies(self):
        fam = stable_model()
        cls = nc.dk_class(fam.weights, F(3, 4))
        single = nc.stratified_evaluate(cls, [(fam.weights, fam)])
        double = nc.stratified_evaluate(cls, [(fam.weights, fam)] * 2)
        assert single == nc.evaluate_class(cls, fam)
        assert double == 2 * single

    def test_shape_gate(self):
        w = nc.make_weights(3, 2, 2)
        fam = nc.FamilyModel.concrete(w, (), (0, 0, 0), (0, 0))
        bad = nc.DivisorClass(w, 1, (F(1), F(1)), 0, F(-2), {})
        with pytest.raises(ShapeNotFunctorial):
            nc.stratified_evaluate(bad, [(w, fam)])
        key = nc.canonical_boundary_key(w, 1, 1)
        with_boundary = nc.DivisorClass(w, 1, (F(1), F(1)), 0, F(-1), {key: F(1)})
        with pytest.raises(ShapeNotFunctorial):
            nc.stratified_evaluate(with_boundary, [(w, fam)])


class TestKeyIdentities:
    def test_telescoping_drops(self):
        for fam in random_family_batch(31337, 120):
            w = fam.weights
            n, m = w.n, w.m
            for i in range(fam.n_steps):
                step = fam.steps[i]
                lo = nc.f_values(fam, i)
                hi = nc.f_values(fam, i + 1)
                drop_sigma = F(step.r1 * (n - step.r1), n - 1) if n >= 2 else F(0)
                drop_tau = F(step.r2 * (m - step.r2), m - 1) if m >= 2 else F(0)
                drop_mixed = (F(step.r1 * (m - step.r2) + step.r2 * (n - step.r1), n * m)
                              if n >= 1 and m >= 1 else F(0))
                diffs = tuple(a - b for a, b in zip(lo, hi))
                assert diffs == (1, drop_sigma, drop_tau, drop_mixed)

    def test_level_zero_boundary_identities(self):
        for fam in random_family_batch(4242, 120):
            w = fam.weights
            report = nc.intersection_numbers(fam)
            f_delta, f_sigma, f_tau, f_mixed = nc.f_values(fam, 0)
            assert f_delta == report.delta_B
            if w.n >= 2:
                assert f_sigma == report.psi_sigma_B + F(2, w.n - 1) * report.delta_s_B
            if w.m >= 2:
                assert f_tau == report.psi_tau_B
            if w.n >= 1 and w.m >= 1:
                assert f_mixed == (report.psi_sigma_B / w.n
                                   + report.psi_tau_B / w.m)

    def test_step_order_independence(self):
        rng = random.Random(2718)
        checked = 0
        for fam in random_family_batch(1618, 1000):
            disjoint = [
                (i, j) for i in range(fam.n_steps) for j in range(i + 1, fam.n_steps)
                if not ((fam.steps[i].sigma & fam.steps[j].sigma)
                        or (fam.steps[i].tau & fam.steps[j].tau))
            ]
            if not disjoint:
                continue
            i, j = rng.choice(disjoint)
            steps = list(fam.steps)
            steps[i], steps[j] = steps[j], steps[i]
            swapped = nc.FamilyModel.concrete(fam.weights, steps,
                                              fam.final_e_sigma, fam.final_e_tau)
            assert nc.intersection_numbers(swapped) == nc.intersection_numbers(fam)
            checked += 1
            if checked >= 100:
                break
        assert checked >= 100

    def test_reconstruction_from_potentials(self):
        # with n, m >= 2 the four level-zero potentials of the abstraction
        # (step counts only) determine the four pairings
        count = 0
        for fam in random_family_batch(3141, 1200):
            w = fam.weights
            if w.n < 2 or w.m < 2:
                continue
            abstraction = nc.FamilyModel.abstract(
                w, [(s.r1, s.r2) for s in fam.steps])
            f_delta, f_sigma, f_tau, f_mixed = nc.f_values(abstraction, 0)
            psi_tau = f_tau
            delta = f_delta
            psi_sigma = w.n * (f_mixed - psi_tau / w.m)
            delta_s = (w.n - 1) * (f_sigma - psi_sigma) / 2
            report = nc.intersection_numbers(fam)
            assert (psi_sigma, psi_tau, delta_s, delta) == (
                report.psi_sigma_B, report.psi_tau_B, report.delta_s_B, report.delta_B)
            count += 1
            if count >= 60:
                break
        assert count >= 60


class TestFamilyFiles:
    def test_round_trip_concrete(self):
        fam = stable_model()
        assert nc.family_from_json(nc.family_to_json(fam)) == fam

    def test_round_trip_abstract(self):
        fam = nc.FamilyModel.abstract(nc.make_weights(3, 2, 2), [(1, 1), (0, 2)])
        assert nc.family_from_json(nc.family_to_json(fam)) == fam

    @pytest.mark.parametrize("text,fragment", [
        ("{", "not valid JSON"),
        ("[]", "top level"),
        ('{"n": 5, "m": 0, "k": 2, "mode": "concrete"}', "steps: missing"),
        ('{"n": 5, "m": 0, "k": 2, "mode": "odd", "steps": []}', "mode"),
        ('{"n": 5, "m": 0, "k": 2, "mode": "abstract", "steps": [{"r1": 3}]}',
         "steps[0]"),
        ('{"n": 5, "m": 0, "k": 2, "mode": "concrete", "steps": '
         '[{"sigma": [1, "x"], "tau": []}], "final_e_sigma": [0,0,0,0,0], '
         '"final_e_tau": []}', "steps[0].sigma[1]"),
        ('{"n": 5, "m": 0, "k": 2, "mode": "concrete", "steps": []}',
         "final_e_sigma"),
        ('{"n": 5, "m": 0, "k": 2, "mode": "abstract", "steps": [], '
         '"final_e_sigma": []}', "final_e_sigma"),
        ('{"n": 5, "m": 0, "k": 2, "mode": "abstract", "steps": [], "zz": 1}',
         "unknown field"),
    ])
    def test_error_paths(self, text, fragment):
        with pytest.raises(FamilyFormatError) as excinfo:
            nc.family_from_json(text)
        assert fragment in str(excinfo.value)
