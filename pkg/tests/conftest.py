"""Shared builders for the test suite."""
import numpy as np

from hardy_cesaro import ProblemInstance, PsiProfile, Weight


def random_instance(rng: np.random.Generator) -> ProblemInstance:
    """Moderate instance whose unscaled integrals stay in floating range."""
    kind = rng.integers(0, 3)
    if kind == 0:
        psi = PsiProfile.power(float(rng.uniform(0.4, 2.5)))
    elif kind == 1:
        psi = PsiProfile.plateau(float(rng.uniform(0.5, 3.0)),
                                 float(rng.uniform(0.15, 0.8)))
    else:
        a = float(rng.uniform(0.2, 0.8))
        psi = PsiProfile.piecewise_linear(
            (0.0, a, 1.0),
            (0.0, float(rng.uniform(0.2, 2.0)), float(rng.uniform(0.0, 2.0))))
    def weight():
        return Weight.parametric(float(rng.uniform(-0.5, 0.5)),
                                 float(rng.uniform(-1.5, 0.5)),
                                 float(rng.uniform(-1.5, 0.0)), 0.0)
    return ProblemInstance(psi=psi, omega1=weight(), omega2=weight())


def random_decreasing_weight(rng: np.random.Generator) -> Weight:
    return Weight.parametric(float(rng.uniform(-1.0, 0.0)),
                             float(rng.uniform(-2.0, -0.1)),
                             float(rng.uniform(-1.5, 0.0)),
                             float(rng.uniform(-0.25, 0.0)),
                             monotonicity_tag="decreasing")


def substitution_pair(inst: ProblemInstance, s: float):
    """Unscaled unit-interval and tail integrands of the criterion at s."""
    w2, psi = inst.omega2, inst.psi

    def unit(t):
        return w2.eval(s / t) * psi._eval(t) / t

    def tail(x):
        return w2.eval(x) * psi._eval(np.minimum(s / x, 1.0)) / x

    t_seeds = list(psi.breakpoints())
    x_seeds = [s / t for t in t_seeds]
    return unit, tail, t_seeds, x_seeds
