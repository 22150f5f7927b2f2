import math

import numpy as np
import pytest

from hardy_cesaro import (ProblemInstance, PsiProfile, TestFunction, Weight,
                          WeightedMeasure, apply_U, continuous_minorant,
                          delta_kernel, extend_apply, kernel_norm_identity,
                          measure_from_dict, moment)
from hardy_cesaro.boundedness import _ratio_quad
from hardy_cesaro.measures import UndefinedExtensionError
from hardy_cesaro.reference_cases import instance_b

FLAT = ProblemInstance(PsiProfile.power(1.0), Weight.one(), Weight.one())


def smoothed_atom_oracle(inst, atoms, x, h=1e-5, n=200):
    """Image of atoms smeared into narrow uniform densities, by midpoint sums."""
    total = 0.0
    for s, c in atoms:
        y = s - h / 2.0 + h * (np.arange(n) + 0.5) / n
        y = y[(y > 0.0) & (y < x)]
        if y.size:
            total += c * np.mean(inst.psi.eval(np.clip(y / x, 0.0, 1.0)) / x) \
                * (y.size / n)
    return total


class TestDeltaKernel:
    def test_point_values(self):
        assert delta_kernel(FLAT, 1.0, 2.0) == pytest.approx(0.25)
        assert delta_kernel(FLAT, 1.0, 0.5) == 0.0
        assert delta_kernel(FLAT, 2.0, 2.0) == pytest.approx(0.5)

    def test_vanishes_below_location_for_any_kernel(self):
        inst = ProblemInstance(PsiProfile.gauss_essential(), Weight.one(), Weight.one())
        x = np.linspace(0.1, 0.9, 9)
        assert np.all(delta_kernel(inst, 1.0, x) == 0.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            delta_kernel(FLAT, 0.0, 1.0)
        with pytest.raises(ValueError):
            delta_kernel(FLAT, 1.0, -1.0)


class TestExtendApply:
    def test_point_mass_at_zero_is_scaled_point_mass(self):
        inst = ProblemInstance(PsiProfile.power(2.0), Weight.one(), Weight.one())
        res = extend_apply(inst, WeightedMeasure.point_mass(0.0, 1.0))
        assert res.delta0_coefficient == moment(inst.psi)
        x = np.logspace(-2, 2, 9)
        assert np.all(res.l1_part(x) == 0.0)

    def test_density_only_consistent_with_function_operator(self):
        f = TestFunction.indicator(1.0)
        res = extend_apply(FLAT, WeightedMeasure.from_density(f))
        assert res.delta0_coefficient == 0.0
        grid = np.asarray(res.density_image.x)
        direct = np.array([apply_U(FLAT, f, float(x)) for x in grid])
        assert np.max(np.abs(res.l1_part(grid) - direct)) <= 10.0 * FLAT.quad_tol

    def test_mixed_atoms_match_kernel_sum_and_oracle(self):
        mu = WeightedMeasure(atoms=((1.0, 2.0), (2.0, -3.0)))
        res = extend_apply(FLAT, mu)
        assert res.l1_part(4.0) == pytest.approx(-0.25, abs=1e-12)
        oracle = smoothed_atom_oracle(FLAT, mu.atoms, 4.0)
        assert res.l1_part(4.0) == pytest.approx(oracle, abs=1e-6)

    def test_linearity_in_the_measure(self):
        mu = WeightedMeasure(atoms=((0.5, 1.0),),
                             density=TestFunction.indicator(1.0))
        nu = WeightedMeasure(atoms=((2.0, -1.0),))
        a, b = 2.0, -0.5
        combo = WeightedMeasure(
            atoms=((0.5, a * 1.0), (2.0, b * -1.0)),
            density=mu.density.scaled(a))
        r_combo = extend_apply(FLAT, combo)
        r_mu = extend_apply(FLAT, mu)
        r_nu = extend_apply(FLAT, nu)
        x = np.logspace(-1, 1, 11)
        lhs = r_combo.l1_part(x)
        rhs = a * r_mu.l1_part(x) + b * r_nu.l1_part(x)
        assert np.max(np.abs(lhs - rhs)) <= 10.0 * FLAT.quad_tol
        assert r_combo.delta0_coefficient == pytest.approx(
            a * r_mu.delta0_coefficient + b * r_nu.delta0_coefficient)

    def test_infinite_moment_with_mass_at_zero_is_undefined(self):
        inst = ProblemInstance(PsiProfile.plateau(1.0, 0.0),
                               Weight.one(), Weight.one())
        with pytest.raises(UndefinedExtensionError):
            extend_apply(inst, WeightedMeasure.point_mass(0.0, 1.0))

    def test_measure_validation(self):
        with pytest.raises(ValueError):
            WeightedMeasure(atoms=((1.0, 1.0), (1.0, 2.0)))
        with pytest.raises(ValueError):
            WeightedMeasure(atoms=((-1.0, 1.0),))

    def test_json_round_trip(self):
        mu = measure_from_dict({"atoms": [{"s": 0.0, "c": 1.0},
                                          {"s": 2.0, "c": -3.0}],
                                "density": {"kind": "closed_form",
                                            "terms": [{"coef": 1.0, "cutoff": 1.0}]}})
        assert mu.mass_at_zero == 1.0
        assert mu.positive_atoms == ((2.0, -3.0),)
        again = measure_from_dict(mu.to_dict())
        assert again.to_dict() == mu.to_dict()


class TestKernelNormIdentity:
    def test_flat_instance(self):
        for s in (0.2, 1.0, 7.0):
            rec = kernel_norm_identity(FLAT, s)
            assert rec.kernel_norm == pytest.approx(1.0, abs=1e-7)
            assert rec.rel_gap <= 1e-8

    def test_exponential_instance(self):
        rec = kernel_norm_identity(instance_b(1.0), 2.0)
        assert rec.rel_gap <= 1e-6

    def test_plateau_closed_form(self):
        inst = ProblemInstance(PsiProfile.plateau(1.0, 0.5),
                               Weight.one(), Weight.one())
        rec = kernel_norm_identity(inst, 1.3)
        assert rec.kernel_norm == pytest.approx(math.log(2.0), rel=1e-9)
        assert rec.phi_value == pytest.approx(math.log(2.0), rel=1e-9)


class TestContinuousMinorant:
    def test_plateau_ramp_meets_gap(self):
        res = continuous_minorant(PsiProfile.plateau(1.0, 0.5), 0.01)
        assert res.moment_gap <= 0.01
        t = np.linspace(0.0, 1.0, 401)
        below = res.profile.eval(t) <= PsiProfile.plateau(1.0, 0.5).eval(t) + 1e-12
        assert np.all(below)

    def test_continuous_input_unchanged(self):
        p = PsiProfile.piecewise_linear((0.0, 0.4, 1.0), (0.0, 1.0, 0.5))
        res = continuous_minorant(p, 0.05)
        assert res.profile is p
        assert res.moment_gap == 0.0

    def test_generous_epsilon_still_ramps(self):
        p = PsiProfile.plateau(1.0, 0.5)
        res = continuous_minorant(p, 10.0)
        assert res.profile.kind == "piecewise_linear"
        assert 0.0 <= res.moment_gap <= 10.0

    def test_downward_jump(self):
        p = PsiProfile.piecewise_linear((0.0, 0.5, 0.5, 1.0),
                                        (1.0, 1.0, 0.2, 0.2))
        res = continuous_minorant(p, 0.02)
        assert res.moment_gap <= 0.02
        t = np.linspace(0.0, 1.0, 401)
        assert np.all(res.profile.eval(t) <= p.eval(t) + 1e-12)

    def test_scaled_sum_of_piecewise_kinds(self):
        p = PsiProfile.scaled_sum(
            (1.0, 2.0),
            (PsiProfile.plateau(1.0, 0.5),
             PsiProfile.piecewise_linear((0.0, 0.3, 0.3, 1.0),
                                         (0.0, 0.0, 0.5, 0.5))))
        res = continuous_minorant(p, 0.05)
        assert res.moment_gap <= 0.05

    def test_preconditions(self):
        with pytest.raises(ValueError):
            continuous_minorant(PsiProfile.plateau(1.0, 0.0), 0.1)
        with pytest.raises(ValueError):
            continuous_minorant(PsiProfile.power(1.0), 0.1)
        with pytest.raises(ValueError):
            continuous_minorant(PsiProfile.plateau(1.0, 0.5), 0.0)

    def test_operator_distance_proxy_decreases(self):
        w = Weight.parametric(0, 0.2, 0, 0)
        psi = PsiProfile.plateau(1.0, 0.5)
        inst = ProblemInstance(psi, w, w)
        s_grid = np.logspace(-2, 2, 13)
        eps = 0.32
        sups = []
        for _ in range(6):
            res = continuous_minorant(psi, eps)
            inst_min = ProblemInstance(res.profile, w, w)
            gap = max(_ratio_quad(inst, float(s)).value
                      - _ratio_quad(inst_min, float(s)).value
                      for s in s_grid)
            sups.append(gap)
            eps /= 2.0
        assert all(b <= a + 1e-9 for a, b in zip(sups, sups[1:]))
        assert sups[-1] <= 0.1 * sups[0] + 1e-9
