"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Every tolerance is fixed here, not calibrated elsewhere.
"""
import math

import numpy as np
import pytest

from conftest import random_decreasing_weight, random_instance, substitution_pair
from hardy_cesaro import (ProblemInstance, PsiProfile, TestFunction, Weight,
                          WeightedMeasure, apply_U, certify, continuous_minorant,
                          duality_gap, extend_apply, kernel_norm_identity,
                          moment, weak_star_limit_check)
from hardy_cesaro.boundedness import _ratio_quad
from hardy_cesaro.operators import random_test_pair
from hardy_cesaro.quadrature import integrate_tail, integrate_unit
from hardy_cesaro.reference_cases import (acceptance_instances, instance_b,
                                          run_example_a, run_example_b,
                                          run_example_c)
from test_measures import smoothed_atom_oracle

FLAT = ProblemInstance(PsiProfile.power(1.0), Weight.one(), Weight.one())


def report(number: int, label: str, ok: bool):
    print(f"[criterion {number:02d}] {label}: {'PASS' if ok else 'FAIL'}")
    assert ok, f"criterion {number} failed: {label}"


def test_criterion_01_verdict_table():
    rep = run_example_a()
    mismatches = [l for l, _, ok in rep.rows if not ok]
    report(1, f"verdict table, {len(rep.rows)} cells, "
              f"{len(mismatches)} mismatches", not mismatches)


def test_criterion_02_exponential_envelope():
    rep = run_example_b(n_points=20)
    report(2, "two-sided exponential envelope and certification", rep.all_ok)


def test_criterion_03_gaussian_envelope():
    rep = run_example_c()
    report(3, "gaussian envelope for the essential kernel", rep.all_ok)


def test_criterion_04_decreasing_weights_ratio_below_moment():
    rng = np.random.default_rng(2024)
    ok = True
    for _ in range(10):
        w = random_decreasing_weight(rng)
        psi = PsiProfile.power(float(rng.uniform(0.3, 2.5)))
        inst = ProblemInstance(psi, w, w)
        m = moment(psi, inst.quad_tol)
        verdict = certify(inst)
        ok = ok and verdict.bounded \
            and bool(np.all(verdict.ratio_values <= m * (1.0 + 1e-6)))
    report(4, "ten random decreasing weights stay below the kernel moment", ok)


def test_criterion_05_plateau_lower_bound():
    ok = True
    for K, a in ((1.0, 0.5), (2.0, 0.9)):
        for beta in (0.1, 0.3):
            w = Weight.parametric(0, beta, 0, 0, monotonicity_tag="increasing")
            inst = ProblemInstance(PsiProfile.plateau(K, a), w, w)
            verdict = certify(inst)
            floor = K * (1.0 - a) * (1.0 - 1e-6)
            ok = ok and verdict.bounded \
                and bool(np.all(verdict.ratio_values >= floor))
    report(5, "plateau kernels dominate K(1-a) times increasing weights", ok)


def test_criterion_06_duality_gaps():
    instances = [
        ("poly_weights", acceptance_instances()[0][1]),
        ("flat", FLAT),
        ("exp_decay", instance_b(1.0)),
    ]
    rng = np.random.default_rng(42)
    worst = 0.0
    for _, inst in instances:
        for _ in range(10):
            f, h = random_test_pair(rng, inst)
            worst = max(worst, duality_gap(inst, f, h))
    report(6, f"30 seeded duality pairings, max gap {worst:.2e}", worst <= 1e-6)


def test_criterion_07_kernel_norm_identity():
    worst = 0.0
    for name, inst in acceptance_instances():
        for s in np.logspace(math.log10(0.05), math.log10(20.0), 20):
            gap = kernel_norm_identity(inst, float(s)).rel_gap
            worst = max(worst, gap)
    report(7, f"point-mass norm identity, max rel gap {worst:.2e}",
           worst <= 1e-6)


def test_criterion_08_measure_extension():
    inst2 = ProblemInstance(PsiProfile.power(2.0), Weight.one(), Weight.one())
    res0 = extend_apply(inst2, WeightedMeasure.point_mass(0.0, 1.0))
    xs = np.logspace(-2, 2, 9)
    ok = res0.delta0_coefficient == moment(inst2.psi) \
        and bool(np.all(res0.l1_part(xs) == 0.0))

    f = TestFunction.indicator(1.0)
    res1 = extend_apply(FLAT, WeightedMeasure.from_density(f))
    grid = np.asarray(res1.density_image.x)
    direct = np.array([apply_U(FLAT, f, float(x)) for x in grid])
    ok = ok and float(np.max(np.abs(res1.l1_part(grid) - direct))) \
        <= 10.0 * FLAT.quad_tol

    mu = WeightedMeasure(atoms=((1.0, 2.0), (2.0, -3.0)))
    res2 = extend_apply(FLAT, mu)
    oracle = smoothed_atom_oracle(FLAT, mu.atoms, 4.0)
    ok = ok and abs(res2.l1_part(4.0) - oracle) <= 1e-6
    report(8, "measure extension: point mass at 0, density part, mixed atoms", ok)


def test_criterion_09_weak_compactness_obstruction():
    verdict = certify(FLAT)
    rep = weak_star_limit_check(FLAT)
    norm_ok = bool(np.all(rep.rho_norms <= verdict.norm_estimate * (1.0 + 1e-6)))
    i = rep.g_names.index("exp_decay")
    tiny_s = int(np.argmin(rep.s_values))
    pairing_ok = abs(rep.pairings[i, tiny_s] - 1.0) <= 1e-3
    j = list(rep.epsilons).index(1e-2)
    conc_ok = rep.concentration[tiny_s, j] >= 0.99
    report(9, "bounded kernels with point-mass escape and 99% concentration",
           norm_ok and pairing_ok and conc_ok)


def test_criterion_10_substitution_and_minorant_suites():
    rng = np.random.default_rng(1234)
    ok = True
    for _ in range(20):
        inst = random_instance(rng)
        s = float(np.exp(rng.uniform(np.log(0.1), np.log(10.0))))
        unit, tail, t_seeds, x_seeds = substitution_pair(inst, s)
        ru = integrate_unit(unit, 1e-8, breakpoints=t_seeds)
        rt = integrate_tail(tail, s, 1e-8, breakpoints=x_seeds)
        allowance = ru.abs_error_estimate + rt.abs_error_estimate \
            + 1e-12 * max(1.0, abs(ru.value))
        ok = ok and not ru.diverged and not rt.diverged \
            and abs(ru.value - rt.value) <= allowance

    w = Weight.parametric(0, 0.2, 0, 0)
    psi = PsiProfile.plateau(1.0, 0.5)
    inst = ProblemInstance(psi, w, w)
    s_grid = np.logspace(-2, 2, 13)
    eps, sups = 0.32, []
    for _ in range(6):
        res = continuous_minorant(psi, eps)
        inst_min = ProblemInstance(res.profile, w, w)
        sups.append(max(_ratio_quad(inst, float(s)).value
                        - _ratio_quad(inst_min, float(s)).value
                        for s in s_grid))
        eps /= 2.0
    ok = ok and all(b <= a + 1e-9 for a, b in zip(sups, sups[1:])) \
        and sups[-1] <= 0.1 * sups[0] + 1e-9
    report(10, "substitution identity (20 seeded) and minorant convergence", ok)
