import math

import numpy as np
import pytest

from conftest import random_instance, substitution_pair
from hardy_cesaro.quadrature import (EvaluationError, integrate_tail,
                                     integrate_unit)


class TestUnitInterval:
    def test_power_kernel_over_t(self):
        # psi(t)/t with psi = t is the constant 1
        r = integrate_unit(lambda t: np.ones_like(t), 1e-8)
        assert not r.diverged
        assert r.value == pytest.approx(1.0, abs=1e-8)
        assert r.abs_error_estimate <= max(1e-8, 1e-8 * abs(r.value))

    def test_inverse_square_root(self):
        r = integrate_unit(lambda t: t ** -0.5, 1e-8)
        assert not r.diverged
        assert r.value == pytest.approx(2.0, abs=2e-8)

    def test_harmonic_singularity_diverges(self):
        r = integrate_unit(lambda t: 1.0 / t, 1e-8)
        assert r.diverged

    def test_breakpoint_seeds_locate_late_support(self):
        # support only below t = 1e-3; a seed keeps the march from stopping early
        r = integrate_unit(lambda t: np.where(t <= 1e-3, 1.0 / t, 0.0), 1e-8,
                           breakpoints=[1e-3])
        assert r.diverged  # still the harmonic singularity

        r = integrate_unit(lambda t: np.where(t <= 1e-3, 1.0, 0.0), 1e-10,
                           breakpoints=[1e-3])
        assert not r.diverged
        assert r.value == pytest.approx(1e-3, rel=1e-9)

    def test_nan_raises_with_abscissa(self):
        def bad(t):
            out = np.ones_like(t)
            out[t < 0.2] = np.nan
            return out

        with pytest.raises(EvaluationError) as err:
            integrate_unit(bad, 1e-8)
        assert 0.0 < err.value.abscissa < 0.2

    def test_rejects_bad_tolerance(self):
        with pytest.raises(ValueError):
            integrate_unit(lambda t: t, 0.0)


class TestTail:
    def test_exponential(self):
        r = integrate_tail(lambda x: np.exp(-x), 1.0, 1e-8)
        assert not r.diverged
        assert r.value == pytest.approx(math.exp(-1.0), rel=1e-8)

    def test_exponential_envelope_bound(self):
        # e^-x / x^2 from 1: below the integral of e^-x / x from 1
        r = integrate_tail(lambda x: np.exp(-x) / x ** 2, 1.0, 1e-8)
        assert not r.diverged
        assert r.value <= math.exp(-1.0)

    def test_harmonic_tail_diverges(self):
        r = integrate_tail(lambda x: 1.0 / x, 1.0, 1e-8)
        assert r.diverged

    def test_finite_upper_limit(self):
        r = integrate_tail(lambda x: 1.0 / x, 1.0, 1e-10, upper=math.e)
        assert not r.diverged
        assert r.value == pytest.approx(1.0, rel=1e-9)

    def test_rejects_bad_endpoints(self):
        with pytest.raises(ValueError):
            integrate_tail(lambda x: x, 0.0, 1e-8)
        with pytest.raises(ValueError):
            integrate_tail(lambda x: x, 1.0, 1e-8, upper=0.5)


class TestInvariants:
    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_linearity(self, c):
        base = integrate_unit(lambda t: t ** 0.3, 1e-10)
        scaled = integrate_unit(lambda t: c * t ** 0.3, 1e-10)
        assert scaled.value == pytest.approx(c * base.value, rel=1e-9)

    def test_divergence_monotonicity(self):
        # f >= g >= 0 with g divergent forces f divergent
        g = lambda t: 1.0 / t
        f = lambda t: (1.0 + t) / t
        assert integrate_unit(g, 1e-8).diverged
        assert integrate_unit(f, 1e-8).diverged

        g_tail = lambda x: 1.0 / x
        f_tail = lambda x: 2.0 / x
        assert integrate_tail(g_tail, 1.0, 1e-8).diverged
        assert integrate_tail(f_tail, 1.0, 1e-8).diverged

    def test_substitution_identity_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            inst = random_instance(rng)
            s = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
            unit, tail, t_seeds, x_seeds = substitution_pair(inst, s)
            ru = integrate_unit(unit, 1e-8, breakpoints=t_seeds)
            rt = integrate_tail(tail, s, 1e-8, breakpoints=x_seeds)
            assert not ru.diverged and not rt.diverged
            allowance = ru.abs_error_estimate + rt.abs_error_estimate \
                + 1e-12 * max(1.0, abs(ru.value))
            assert abs(ru.value - rt.value) <= allowance
