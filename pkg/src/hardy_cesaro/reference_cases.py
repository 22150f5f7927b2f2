"""Bundled reference instances and their scripted verification sweeps.

Three named settings exercise the certifier end to end:

  a: power kernel t^alpha with polynomial weights (1+x)^beta on both sides.
     Certification must match the exact rule: bounded iff beta2 <= beta1 and
     beta2 < alpha.
  b: power kernel with exponentially decaying weights.  The criterion
     integral obeys the two-sided envelope
     2^-(alpha+2) e^-s / s <= Phi(s) <= e^-s / s on s >= 1.
  c: essentially vanishing kernel exp(-1/t^2) with exponentially growing
     target weight e^x and source weight e^(x^2/4)/x.  The criterion
     integral obeys c_lo e^(s^2/4)/s <= Phi(s) for s >= 2 and
     Phi(s) <= c_hi e^(s^2/4)/s for s >= 4, with Gaussian constants
     c_lo and c_hi evaluated by the quadrature engine itself.

The sweep runners return structured reports with one PASS/FAIL row per
checked bound; the command line prints them and the acceptance tests assert
on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundedness import certify, phi
from .quadrature import integrate_tail, integrate_unit
from .weights import ProblemInstance, PsiProfile, Weight

__all__ = [
    "CaseReport", "instance_a", "instance_b", "instance_c",
    "expected_bounded_a", "run_example_a", "run_example_b", "run_example_c",
    "run_example", "acceptance_instances",
    "EXAMPLE_A_ALPHAS", "EXAMPLE_A_BETAS",
]

EXAMPLE_A_ALPHAS = (0.5, 1.0, 2.0)
EXAMPLE_A_BETAS = (-1.0, 0.0, 0.4, 1.5)
#: multiplicative slack on two-sided envelope checks
ENVELOPE_SLACK = 1e-6


@dataclass
class CaseReport:
    name: str
    rows: list = field(default_factory=list)   # (label, detail, ok)

    @property
    def all_ok(self) -> bool:
        return all(ok for _, _, ok in self.rows)

    def add(self, label: str, detail: str, ok: bool):
        self.rows.append((label, detail, bool(ok)))

    def lines(self) -> list[str]:
        out = []
        for label, detail, ok in self.rows:
            out.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        out.append(f"{self.name}: {'all checks passed' if self.all_ok else 'checks FAILED'}")
        return out

    def to_dict(self) -> dict:
        return {"name": self.name, "all_ok": self.all_ok,
                "rows": [{"label": l, "detail": d, "ok": ok}
                         for l, d, ok in self.rows]}


def instance_a(alpha: float, beta1: float, beta2: float,
               tol: float = 1e-8) -> ProblemInstance:
    return ProblemInstance(
        psi=PsiProfile.power(alpha),
        omega1=Weight.parametric(0.0, beta1, 0.0, 0.0),
        omega2=Weight.parametric(0.0, beta2, 0.0, 0.0),
        quad_tol=tol)


def instance_b(alpha: float, tol: float = 1e-8) -> ProblemInstance:
    return ProblemInstance(
        psi=PsiProfile.power(alpha),
        omega1=Weight.parametric(0.0, -1.0, -1.0, 0.0),
        omega2=Weight.parametric(0.0, 0.0, -1.0, 0.0),
        quad_tol=tol)


def instance_c(tol: float = 1e-8) -> ProblemInstance:
    return ProblemInstance(
        psi=PsiProfile.gauss_essential(),
        omega1=Weight.parametric(-1.0, 0.0, 0.0, 0.25),
        omega2=Weight.parametric(0.0, 0.0, 1.0, 0.0),
        quad_tol=tol)


def expected_bounded_a(alpha: float, beta1: float, beta2: float) -> bool:
    return beta2 <= beta1 and beta2 < alpha


def acceptance_instances() -> list[tuple[str, ProblemInstance]]:
    """Certified-bounded instances exercised across the acceptance suite."""
    return [
        ("poly_weights", instance_a(1.0, -1.0, -1.0)),
        ("exp_decay_alpha1", instance_b(1.0)),
        ("exp_decay_alpha2", instance_b(2.0)),
        ("essential_kernel", instance_c()),
        ("decreasing_shared", ProblemInstance(
            psi=PsiProfile.power(1.0),
            omega1=Weight.parametric(0.0, -1.0, 0.0, 0.0, monotonicity_tag="decreasing"),
            omega2=Weight.parametric(0.0, -1.0, 0.0, 0.0, monotonicity_tag="decreasing"))),
        ("plateau_increasing", ProblemInstance(
            psi=PsiProfile.plateau(1.0, 0.5),
            omega1=Weight.parametric(0.0, 0.1, 0.0, 0.0, monotonicity_tag="increasing"),
            omega2=Weight.parametric(0.0, 0.1, 0.0, 0.0, monotonicity_tag="increasing"))),
    ]


def run_example_a() -> CaseReport:
    """Verdict table over the (alpha, beta1, beta2) grid against the exact rule."""
    report = CaseReport(name="example a")
    for alpha in EXAMPLE_A_ALPHAS:
        for beta1 in EXAMPLE_A_BETAS:
            for beta2 in EXAMPLE_A_BETAS:
                verdict = certify(instance_a(alpha, beta1, beta2))
                expected = expected_bounded_a(alpha, beta1, beta2)
                ok = verdict.bounded == expected
                report.add(
                    f"alpha={alpha} beta1={beta1} beta2={beta2}",
                    f"status={verdict.status}, expected "
                    f"{'Bounded' if expected else 'unbounded'}",
                    ok)
    return report


def run_example_b(n_points: int = 20) -> CaseReport:
    """Two-sided exponential envelope on s in [1, 10] plus certification."""
    report = CaseReport(name="example b")
    for alpha in (1.0, 2.0):
        inst = instance_b(alpha)
        lo_const = 2.0 ** -(alpha + 2.0)
        for i in range(n_points):
            s = 1.0 + (10.0 - 1.0) * i / (n_points - 1)
            value = phi(inst, s)
            upper = math.exp(-s) / s
            lower = lo_const * upper
            ok = (value <= upper * (1.0 + ENVELOPE_SLACK)
                  and value >= lower * (1.0 - ENVELOPE_SLACK))
            report.add(f"alpha={alpha} s={s:.3f}",
                       f"{lower:.6e} <= {value:.6e} <= {upper:.6e}", ok)
        verdict = certify(inst)
        report.add(f"alpha={alpha} certify", f"status={verdict.status}",
                   verdict.bounded)
    return report


def _gauss(u):
    u = np.asarray(u, dtype=float)
    return np.exp(-u * u)


def gaussian_constants(tol: float = 1e-10) -> tuple[float, float]:
    """(integral of exp(-u^2) over [0,1], over the whole line), by quadrature."""
    unit = integrate_unit(_gauss, tol)
    tail = integrate_tail(_gauss, 1.0, tol)
    half_line = unit.value + tail.value
    return unit.value, 2.0 * half_line


def run_example_c() -> CaseReport:
    """Gaussian-envelope bounds for the essentially vanishing kernel."""
    report = CaseReport(name="example c")
    inst = instance_c()
    gauss01, gauss_line = gaussian_constants()
    c_lo = gauss01
    c_hi = 4.0 * gauss_line + 1.0
    for s in (2.0, 3.0, 4.0, 6.0, 8.0):
        value = phi(inst, s)
        lower = c_lo * math.exp(s * s / 4.0) / s
        ok = value >= lower * (1.0 - ENVELOPE_SLACK)
        report.add(f"lower bound s={s}", f"{value:.6e} >= {lower:.6e}", ok)
    for s in (4.0, 6.0, 8.0):
        value = phi(inst, s)
        upper = c_hi * math.exp(s * s / 4.0) / s
        ok = value <= upper * (1.0 + ENVELOPE_SLACK)
        report.add(f"upper bound s={s}", f"{value:.6e} <= {upper:.6e}", ok)
    verdict = certify(inst)
    report.add("certify", f"status={verdict.status}", verdict.bounded)
    return report


def run_example(which: str) -> CaseReport:
    if which == "a":
        return run_example_a()
    if which == "b":
        return run_example_b()
    if which == "c":
        return run_example_c()
    raise ValueError("example must be one of 'a', 'b', 'c'")
