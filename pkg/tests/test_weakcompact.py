import math

import numpy as np
import pytest

from hardy_cesaro import (ProblemInstance, PsiProfile, RhoKernel, Term,
                          TestFunction, Weight, certify, pairing, rho_norm,
                          weak_star_limit_check)
from hardy_cesaro.reference_cases import instance_c
from hardy_cesaro.weakcompact import SingularWeightError, omega1_limit_at_zero

FLAT = ProblemInstance(PsiProfile.power(1.0), Weight.one(), Weight.one())


class TestRhoKernel:
    def test_vanishes_below_s_and_nonnegative(self):
        k = RhoKernel(FLAT, 2.0)
        x = np.logspace(-2, 2, 41)
        v = k.eval(x)
        assert np.all(v[x < 2.0] == 0.0)
        assert np.all(v >= 0.0)

    def test_matches_scaled_point_mass_image(self):
        k = RhoKernel(FLAT, 1.0)
        assert k.eval(2.0) == pytest.approx(0.25)


class TestRhoNorm:
    def test_flat_instance_constant(self):
        for s in (1e-3, 1.0, 1e3):
            assert rho_norm(FLAT, s) == pytest.approx(1.0, abs=1e-8)

    def test_bounded_by_certified_estimate(self):
        verdict = certify(FLAT)
        for s in np.logspace(-5, 2, 8):
            assert rho_norm(FLAT, float(s)) <= \
                verdict.norm_estimate * (1.0 + 1e-6)

    def test_zero_kernel(self):
        inst = ProblemInstance(PsiProfile.zero(), Weight.one(), Weight.one())
        assert rho_norm(inst, 1.0) == 0.0


class TestPairing:
    def test_target_weight_gives_rho_norm(self):
        for s in (0.1, 1.0, 10.0):
            p = pairing(FLAT, TestFunction.from_weight(FLAT.omega2), s)
            assert p == pytest.approx(rho_norm(FLAT, s), abs=1e-7)

    def test_vanishing_at_zero_pairs_to_zero(self):
        g = TestFunction.closed_form(Term(coef=1.0, power=1.0, rate=-1.0))
        values = [pairing(FLAT, g, s) for s in (1e-1, 1e-2, 1e-3, 1e-4)]
        assert values[-1] <= 1e-3
        assert values == sorted(values, reverse=True)

    def test_exponential_limit(self):
        g = TestFunction.exponential(-1.0)
        assert pairing(FLAT, g, 1e-4) == pytest.approx(1.0, abs=1e-2)


class TestOmegaLimit:
    def test_stable_weight(self):
        assert omega1_limit_at_zero(Weight.one()) == pytest.approx(1.0)
        assert omega1_limit_at_zero(Weight.parametric(0, 2.5, 0, 0)) == \
            pytest.approx(1.0, abs=1e-6)

    def test_singular_weight_rejected(self):
        with pytest.raises(SingularWeightError):
            omega1_limit_at_zero(Weight.parametric(-1, 0, 0, 0.25))
        with pytest.raises(SingularWeightError):
            omega1_limit_at_zero(Weight.parametric(0.5, 0, 0, 0))


class TestWeakStarCheck:
    @pytest.fixture(scope="class")
    def report(self):
        return weak_star_limit_check(FLAT)

    def test_pairing_norm_consistency(self, report):
        # the target weight is flat, so the constant suite member reproduces
        # the norms through its limit target
        i = report.g_names.index("exp_decay")
        assert report.limit_targets[i] == pytest.approx(report.moment)

    def test_escape_gaps_decay(self, report):
        for i, _ in enumerate(report.g_names):
            gaps = report.gaps[i]
            assert gaps[-1] <= gaps[0] + 1e-12
            assert np.all(np.diff(gaps[-4:]) <= 1e-12)
            assert gaps[-1] <= 1e-3 * (1.0 + abs(report.limit_targets[i]))

    def test_concentration_builds_up(self, report):
        j = list(report.epsilons).index(1e-2)
        conc = report.concentration[:, j]
        s = report.s_values
        inside = s < 1e-3  # once s is below eps/10
        assert np.all(np.diff(conc[inside]) >= -1e-9)
        assert conc[-1] >= 0.99

    def test_norms_bounded_alongside_escape(self, report):
        verdict = certify(FLAT)
        assert report.rho_norms.max() <= verdict.norm_estimate * (1.0 + 1e-6)

    def test_zero_kernel_degenerate(self):
        inst = ProblemInstance(PsiProfile.zero(), Weight.one(), Weight.one())
        rep = weak_star_limit_check(inst, s_sequence=np.logspace(-1, -3, 5))
        assert rep.degenerate
        assert np.all(rep.pairings == 0.0)

    def test_singular_source_weight_rejected(self):
        with pytest.raises(SingularWeightError, match="w1\\(0\\)"):
            weak_star_limit_check(instance_c())

    def test_infinite_moment_rejected(self):
        inst = ProblemInstance(PsiProfile.plateau(1.0, 0.0),
                               Weight.one(), Weight.one())
        with pytest.raises(ValueError, match="moment"):
            weak_star_limit_check(inst)
