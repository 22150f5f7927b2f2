"""Numerical witness that the normalized point-evaluation kernels escape.

For s > 0 the operator is represented against point evaluations by the
kernel rho(s)(x) = psi(s/x) / (x w1(s)) on [s, inf).  On a certified
instance these kernels stay norm bounded, yet as s tends to 0 they pair
against continuous test functions like a point mass at 0 scaled by the
kernel moment over w1(0), and their weighted mass concentrates near the
origin.  A norm-bounded family with that escape behaviour has no weakly
convergent cluster inside the weighted L1 space, which is the computable
half of the no-weak-compactness obstruction; the qualitative statement
itself is not numerically decidable.

``weak_star_limit_check`` tabulates the pairings, their gaps to the limit
value, and the concentration fractions along a decreasing sequence of s.
It requires the source weight to stabilize to a finite positive value at 0
and refuses to extrapolate weights singular there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .boundedness import _ratio_quad, moment
from .operators import Term, TestFunction
from .quadrature import integrate_tail, integrate_unit
from .weights import ProblemInstance, Weight

__all__ = [
    "RhoKernel", "ConcentrationReport", "SingularWeightError",
    "rho_norm", "pairing", "weak_star_limit_check",
    "omega1_limit_at_zero", "default_g_suite",
]

DEFAULT_S_SEQUENCE = tuple(np.logspace(-1.0, -6.0, 26))
DEFAULT_EPSILONS = (1e-1, 1e-2, 1e-3)


class SingularWeightError(ValueError):
    """Source weight has no finite positive limit at 0."""


@dataclass(frozen=True)
class RhoKernel:
    """Normalized point-evaluation kernel at parameter s."""

    instance: ProblemInstance
    s: float

    def __post_init__(self):
        if self.s <= 0.0:
            raise ValueError("s must be positive")

    def eval(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if np.any(arr <= 0.0):
            raise ValueError("evaluation requires x > 0")
        inst, s = self.instance, self.s
        lw1s = inst.omega1.log_eval(s)
        ratio = np.minimum(s / arr, 1.0)
        with np.errstate(over="ignore", under="ignore"):
            lp = inst.psi._log_eval(ratio)
            out = np.zeros_like(arr)
            m = (arr >= s) & (lp > -math.inf)
            out[m] = np.exp(lp[m] - np.log(arr[m]) - lw1s)
        return float(out[0]) if scalar else out


def rho_norm(inst: ProblemInstance, s: float, tol: float | None = None) -> float:
    """Weighted norm of rho(s); equals the criterion ratio at s."""
    qr = _ratio_quad(inst, float(s), tol)
    return math.inf if qr.diverged else qr.value


def pairing(inst: ProblemInstance, g: TestFunction, s: float,
            tol: float | None = None) -> float:
    """Pairing of g with rho(s): (1/w1(s)) integral of g(s/t) psi(t)/t over (0, 1]."""
    s = float(s)
    if s <= 0.0:
        raise ValueError("s must be positive")
    tol = inst.quad_tol if tol is None else tol
    psi = inst.psi
    lw1s = inst.omega1.log_eval(s)
    if lw1s > 709.0 or lw1s < -709.0:
        raise ValueError("source weight at s is out of floating range")
    scale = math.exp(-lw1s)

    def integrand(t):
        return g.eval(s / t) * psi._eval(t) / t * scale

    seeds = [s / p for p in g.x_breakpoints() if p > s] + list(psi.breakpoints())
    seeds = [p for p in seeds if 0.0 < p < 1.0]
    qr = integrate_unit(integrand, tol, breakpoints=seeds)
    return math.inf if qr.diverged else qr.value


def omega1_limit_at_zero(w1: Weight) -> float:
    """Stabilized value of the source weight at 0.

    Samples w1 at 10^-k for k = 4..8; the successive relative differences
    must shrink and end below 1e-3, otherwise the weight counts as singular
    at 0 and the check refuses to proceed.  The returned value is an Aitken
    acceleration of the last three samples when that is stable, else the
    innermost sample.
    """
    xs = [10.0 ** (-k) for k in range(4, 9)]
    vals = [w1.eval(x) for x in xs]
    diffs = [abs(b - a) / max(abs(b), 1e-300) for a, b in zip(vals, vals[1:])]
    shrinking = all(d2 <= d1 * 1.5 + 1e-15 for d1, d2 in zip(diffs, diffs[1:]))
    if not shrinking or diffs[-1] > 1e-3 or vals[-1] <= 0.0:
        raise SingularWeightError(
            "the source weight does not stabilize to a finite positive value "
            "at 0; the escape check requires finite w1(0)")
    d1 = vals[-2] - vals[-3]
    d2 = vals[-1] - vals[-2]
    denom = d2 - d1
    if denom != 0.0 and abs(d2) < abs(d1):
        accel = vals[-1] - d2 * d2 / denom
        if math.isfinite(accel) and accel > 0.0:
            return accel
    return vals[-1]


def default_g_suite(inst: ProblemInstance) -> list[tuple[str, TestFunction]]:
    """Continuous pairing functions covering g(0) = 0 and g(0) != 0.

    The last entry is a polynomial bump supported in [0, 1] scaled by the
    target weight when that weight is parametric.
    """
    suite = [
        ("exp_decay", TestFunction.exponential(-1.0)),
        ("inverse_square", TestFunction.closed_form(Term(coef=1.0, one_plus_power=-2.0))),
        ("x_exp_decay", TestFunction.closed_form(Term(coef=1.0, power=1.0, rate=-1.0))),
    ]
    w2 = inst.omega2
    bump_terms = []
    for coef, extra_p in ((1.0, 2.0), (-2.0, 3.0), (1.0, 4.0)):
        if w2.kind == "parametric":
            bump_terms.append(Term(coef=coef, power=w2.a + extra_p,
                                   one_plus_power=w2.b, rate=w2.c,
                                   rate2=w2.d, cutoff=1.0))
        else:
            bump_terms.append(Term(coef=coef, power=extra_p, cutoff=1.0))
    suite.append(("weighted_bump", TestFunction.closed_form(*bump_terms)))
    return suite


@dataclass
class ConcentrationReport:
    """Pairings, limit gaps and near-origin mass fractions along shrinking s."""

    s_values: np.ndarray
    g_names: list[str]
    pairings: np.ndarray            # shape (len(g), len(s))
    limit_targets: np.ndarray       # per g
    gaps: np.ndarray                # shape (len(g), len(s))
    epsilons: tuple
    concentration: np.ndarray       # shape (len(s), len(epsilons))
    rho_norms: np.ndarray
    moment: float
    omega1_at_zero: float
    degenerate: bool = False

    def to_dict(self) -> dict:
        return {
            "s": [float(v) for v in self.s_values],
            "g_names": list(self.g_names),
            "pairings": [[float(v) for v in row] for row in self.pairings],
            "limit_targets": [float(v) for v in self.limit_targets],
            "gaps": [[float(v) for v in row] for row in self.gaps],
            "epsilons": [float(e) for e in self.epsilons],
            "concentration": [[float(v) for v in row] for row in self.concentration],
            "rho_norms": [float(v) for v in self.rho_norms],
            "moment": self.moment,
            "omega1_at_zero": self.omega1_at_zero,
            "degenerate": self.degenerate,
        }


def _concentration(inst: ProblemInstance, s: float, eps: float,
                   denom: float, tol: float) -> float:
    """Fraction of the weighted mass of rho(s) inside (0, eps]."""
    if eps <= s or denom <= 0.0:
        return 0.0
    w1, w2, psi = inst.omega1, inst.omega2, inst.psi
    lw1s = w1.log_eval(s)

    def integrand(x):
        lp = psi._log_eval(np.minimum(s / x, 1.0))
        out = np.zeros_like(x)
        m = lp > -math.inf
        if np.any(m):
            xm = x[m]
            with np.errstate(over="ignore", under="ignore"):
                out[m] = np.exp(w2.log_eval(xm) + lp[m] - np.log(xm) - lw1s)
        return out

    seeds = [s / b for b in psi.breakpoints() if s < s / b < eps]
    qr = integrate_tail(integrand, s, tol, breakpoints=seeds, upper=eps)
    if qr.diverged:
        return math.nan
    return min(max(qr.value / denom, 0.0), 1.0)


def weak_star_limit_check(inst: ProblemInstance,
                          g_suite: list[tuple[str, TestFunction]] | None = None,
                          s_sequence=None,
                          epsilons=DEFAULT_EPSILONS) -> ConcentrationReport:
    """Tabulate the escape of rho(s) toward a point mass at 0.

    Preconditions: the source weight stabilizes at 0 (checked by sampling)
    and the kernel moment is finite.  A vanishing kernel yields a degenerate
    report with every pairing 0.
    """
    w10 = omega1_limit_at_zero(inst.omega1)
    m = moment(inst.psi, inst.quad_tol)
    if math.isinf(m):
        raise ValueError("the escape check requires a finite kernel moment")
    degenerate = m == 0.0
    suite = default_g_suite(inst) if g_suite is None else g_suite
    s_vals = np.asarray(DEFAULT_S_SEQUENCE if s_sequence is None else s_sequence,
                        dtype=float)
    if np.any(np.diff(s_vals) >= 0.0):
        raise ValueError("s_sequence must be strictly decreasing")
    names = [name for name, _ in suite]
    pairings = np.zeros((len(suite), s_vals.size))
    targets = np.zeros(len(suite))
    gaps = np.zeros_like(pairings)
    for i, (_, g) in enumerate(suite):
        g0 = g.eval(0.0)
        if not math.isfinite(g0):
            raise ValueError("pairing functions must be finite at 0")
        targets[i] = g0 * m / w10
        for j, s in enumerate(s_vals):
            pairings[i, j] = pairing(inst, g, float(s))
            gaps[i, j] = abs(pairings[i, j] - targets[i])
    norms = np.array([rho_norm(inst, float(s)) for s in s_vals])
    conc = np.zeros((s_vals.size, len(epsilons)))
    for j, s in enumerate(s_vals):
        for k, eps in enumerate(epsilons):
            conc[j, k] = _concentration(inst, float(s), float(eps),
                                        float(norms[j]), inst.quad_tol)
    return ConcentrationReport(
        s_values=s_vals, g_names=names, pairings=pairings,
        limit_targets=targets, gaps=gaps, epsilons=tuple(epsilons),
        concentration=conc, rho_norms=norms, moment=m,
        omega1_at_zero=w10, degenerate=degenerate)
