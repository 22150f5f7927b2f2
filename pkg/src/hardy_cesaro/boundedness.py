"""Evaluation and certification of the weighted boundedness criterion.

For a kernel profile psi and a weight pair (w1, w2) the criterion integral is

    Phi(s) = integral over (0, 1] of w2(s/t) psi(t) / t dt,

and the averaging operator maps L1(w1) boundedly into L1(w2) exactly when
Phi(s) <= C w1(s) for every s > 0.  The certifier samples the ratio
Phi(s)/w1(s) on a log grid, extrapolates the end behaviour, and reports the
grid supremum as the norm estimate.  A verdict is certified by evaluation,
not proved: the grid, its range and the extrapolation rule are recorded in
the verdict so the evidence can be audited.

All ratio evaluations build the integrand as a single exponential of summed
log factors, exp(log w2(s/t) + log psi(t) - log t - log w1(s)).  That keeps
instances whose weights overflow double precision certifiable: the ratio is
of moderate size even when Phi(s) and w1(s) individually are not
representable.  Integrands that pair exponentially growing target weights
with an essentially vanishing kernel concentrate in a spike whose width
shrinks with s; for those the quadrature panels are seeded at the spike,
located by maximizing the log integrand.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quadrature import (QuadResult, U_LIMIT, _EPS, integrate_tail,
                         integrate_unit)
from .weights import ProblemInstance, PsiProfile

__all__ = [
    "BoundednessVerdict", "PhiProfile", "SelfCheckError",
    "moment", "phi", "certify", "phi_profile",
    "DEFAULT_S_MIN", "DEFAULT_S_MAX", "DEFAULT_POINTS_PER_DECADE",
]

DEFAULT_S_MIN = 1e-6
DEFAULT_S_MAX = 1e6
DEFAULT_POINTS_PER_DECADE = 25

#: end-decade log-log slope beyond which the ratio counts as growing
SLOPE_THRESHOLD = 0.05
#: required total growth of the ratio from the grid middle to a boundary
GROWTH_FACTOR = 10.0


class SelfCheckError(RuntimeError):
    """The two integral forms of the criterion disagreed beyond their error bars."""


@dataclass
class BoundednessVerdict:
    """Outcome of certification.

    ``status`` is one of Bounded, MomentInfinite, PhiInfinite or
    RatioUnbounded.  ``norm_estimate`` (present exactly for Bounded) is the
    examined supremum of Phi(s)/w1(s); the refined maximizer is appended to
    the recorded grid so the estimate always equals the grid maximum.
    ``witness`` carries the failing s or the growing direction and its
    fitted exponent.
    """

    status: str
    norm_estimate: float | None = None
    witness: dict | None = None
    s_values: np.ndarray = field(default_factory=lambda: np.array([]))
    ratio_values: np.ndarray = field(default_factory=lambda: np.array([]))
    moment: float = math.nan

    @property
    def bounded(self) -> bool:
        return self.status == "Bounded"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "norm_estimate": self.norm_estimate,
            "witness": self.witness,
            "moment": None if math.isinf(self.moment) else self.moment,
            "moment_infinite": bool(math.isinf(self.moment)),
            "grid": {"s": [float(v) for v in self.s_values],
                     "ratio": [float(v) for v in self.ratio_values]},
        }


@dataclass
class PhiProfile:
    """Tabulated criterion integral and ratio along a log grid of s."""

    s_values: np.ndarray
    phi_values: np.ndarray
    ratio_values: np.ndarray

    def to_dict(self) -> dict:
        return {"s": [float(v) for v in self.s_values],
                "phi": [float(v) for v in self.phi_values],
                "ratio": [float(v) for v in self.ratio_values]}


def log_grid(s_min: float, s_max: float, points_per_decade: int) -> np.ndarray:
    if not (0.0 < s_min < s_max):
        raise ValueError("need 0 < s_min < s_max")
    decades = math.log10(s_max / s_min)
    n = max(2, int(round(decades * points_per_decade)) + 1)
    return np.logspace(math.log10(s_min), math.log10(s_max), n)


# -- kernel moment ---------------------------------------------------------------

def moment(psi: PsiProfile, tol: float = 1e-8) -> float:
    """Integral over (0, 1] of psi(t)/t; +inf when it diverges.

    The value is cached on the profile after the first evaluation.
    """
    cached = psi.cached_moment
    if cached is not None:
        return cached

    def integrand(t):
        with np.errstate(over="ignore", divide="ignore"):
            return np.exp(psi._log_eval(t) - np.log(t))

    qr = integrate_unit(integrand, tol, breakpoints=psi.breakpoints())
    value = math.inf if qr.diverged else qr.value
    psi._store_moment(value)
    return value


# -- scaled criterion integrand ----------------------------------------------------

def _ratio_integrand(inst: ProblemInstance, s: float):
    """Vectorized t-integrand of Phi(s)/w1(s) as one exponential."""
    w1, w2, psi = inst.omega1, inst.omega2, inst.psi
    lw1s = w1.log_eval(s)

    def f(t):
        lp = psi._log_eval(t)
        out = np.zeros_like(t)
        m = lp > -math.inf
        if np.any(m):
            tm = t[m]
            with np.errstate(over="ignore", under="ignore"):
                arg = w2.log_eval(s / tm) + lp[m] - np.log(tm) - lw1s
                out[m] = np.exp(arg)
        return out

    return f


def _scaled_tail_integrand(inst: ProblemInstance, s: float):
    """Vectorized x-integrand of the tail form of Phi(s)/w1(s)."""
    w1, w2, psi = inst.omega1, inst.omega2, inst.psi
    lw1s = w1.log_eval(s)

    def g(x):
        lp = psi._log_eval(np.minimum(s / x, 1.0))
        out = np.zeros_like(x)
        m = lp > -math.inf
        if np.any(m):
            xm = x[m]
            with np.errstate(over="ignore", under="ignore"):
                arg = w2.log_eval(xm) + lp[m] - np.log(xm) - lw1s
                out[m] = np.exp(arg)
        return out

    return g


# -- interior spike location --------------------------------------------------------

def _needs_peak_search(inst: ProblemInstance) -> bool:
    w2 = inst.omega2
    if w2.kind != "parametric" or (w2.c <= 0.0 and w2.d <= 0.0):
        return False

    def essential(p: PsiProfile) -> bool:
        if p.kind == "gauss_essential":
            return True
        if p.kind == "scaled_sum":
            return any(essential(q) for c, q in zip(p.coefficients, p.components) if c != 0.0)
        return False

    return essential(inst.psi)


def _log_integrand_in_u(inst: ProblemInstance, s: float):
    w2, psi = inst.omega2, inst.psi

    def g(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            return w2.log_eval(s * np.exp(u)) + psi._log_eval(np.exp(-u))

    return g


def _golden_max(fun, lo: float, hi: float, iters: int = 90) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if b - a < 1e-13 * (1.0 + abs(a)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)

_PEAK_OFFSETS = np.array([-64.0, -32.0, -16.0, -8.0, -4.0, -2.0, -1.0,
                          0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0])


def _peak_breakpoints(inst: ProblemInstance, s: float
                      ) -> tuple[list[float], list[float], float]:
    """Panel seeds (unit-form t, tail-form x) at the integrand spike.

    The third element is the magnitude of the raw log integrand at its peak,
    used to size the finite-precision noise floor of the evaluation.
    """
    t_seeds = [float(b) for b in inst.psi.breakpoints()]
    x_seeds = [s / t for t in t_seeds]
    if not _needs_peak_search(inst):
        return t_seeds, x_seeds, 0.0
    g = _log_integrand_in_u(inst, s)
    u_hi = min(350.0, U_LIMIT)
    scan = np.linspace(0.0, u_hi, 2048)
    vals = np.asarray(g(scan))
    if not np.any(np.isfinite(vals)):
        return t_seeds, x_seeds, 0.0
    vals = np.where(np.isfinite(vals), vals, -math.inf)
    i = int(np.argmax(vals))
    if i == 0 or math.isinf(vals[i]):
        return t_seeds, x_seeds, 0.0
    lo = scan[i - 1]
    hi = scan[min(i + 1, scan.size - 1)]
    u_star = _golden_max(lambda u: float(g(np.array([u]))[0]), lo, hi)
    g0 = float(g(np.array([u_star]))[0])
    # largest finite curvature estimate over shrinking steps, conservative width
    curv = 0.0
    for h in (1e-2, 1e-3, 1e-4, 1e-5, 1e-6):
        gp = float(g(np.array([u_star + h]))[0])
        gm = float(g(np.array([max(u_star - h, 0.0)]))[0])
        if math.isfinite(gp) and math.isfinite(gm):
            est = abs(gp - 2.0 * g0 + gm) / (h * h)
            curv = max(curv, est)
    width = 1.0 / math.sqrt(max(curv, 1e-8))
    width = min(max(width, 1e-9), 10.0)
    for off in _PEAK_OFFSETS:
        u = u_star + off * width
        if 0.0 < u < U_LIMIT:
            t_seeds.append(math.exp(-u))
            x_seeds.append(s * math.exp(u))
    return t_seeds, x_seeds, abs(g0)


def _effective_tol(inst: ProblemInstance, s: float, tol: float,
                   peak_magnitude: float) -> float:
    """Tolerance floored at the finite-precision noise of the log factors.

    The ratio integrand is exp of a sum of terms that can reach magnitude M
    while cancelling to order one; each evaluation then carries absolute
    noise of order eps * M in the exponent, which no amount of panel
    refinement removes.
    """
    magnitude = max(1.0, abs(inst.omega1.log_eval(s)), peak_magnitude)
    return max(tol, 32.0 * _EPS * magnitude)


# -- criterion evaluation --------------------------------------------------------------

def _ratio_quad(inst: ProblemInstance, s: float, tol: float | None = None,
                self_check: bool = False) -> QuadResult:
    """Quadrature of Phi(s)/w1(s); the cross-check compares the tail form."""
    if s <= 0.0:
        raise ValueError("s must be positive")
    tol = inst.quad_tol if tol is None else tol
    t_seeds, x_seeds, peak = _peak_breakpoints(inst, s)
    tol = _effective_tol(inst, s, tol, peak)
    qr = integrate_unit(_ratio_integrand(inst, s), tol, breakpoints=t_seeds)
    if self_check:
        tr = integrate_tail(_scaled_tail_integrand(inst, s), s, tol,
                            breakpoints=x_seeds)
        if qr.diverged != tr.diverged:
            raise SelfCheckError(
                f"integral forms disagree on divergence at s={s!r}")
        if not qr.diverged:
            gap = abs(qr.value - tr.value)
            allowance = qr.abs_error_estimate + tr.abs_error_estimate \
                + 1e-12 * max(1.0, abs(qr.value))
            if gap > allowance:
                raise SelfCheckError(
                    f"integral forms differ by {gap:.3e} at s={s!r} "
                    f"(allowed {allowance:.3e})")
    return qr


def _tail_ratio_quad(inst: ProblemInstance, s: float,
                     tol: float | None = None) -> QuadResult:
    tol = inst.quad_tol if tol is None else tol
    _, x_seeds, peak = _peak_breakpoints(inst, s)
    tol = _effective_tol(inst, s, tol, peak)
    return integrate_tail(_scaled_tail_integrand(inst, s), s, tol,
                          breakpoints=x_seeds)


def phi(inst: ProblemInstance, s: float, *, self_check: bool = False) -> float:
    """Criterion integral Phi(s); +inf when the quadrature flags divergence.

    Computed as ratio times w1(s) so that the accuracy is relative to the
    ratio; the product may overflow to inf for extreme weights even when the
    ratio itself is moderate.
    """
    qr = _ratio_quad(inst, s, self_check=self_check)
    if qr.diverged:
        return math.inf
    lw1 = inst.omega1.log_eval(s)
    if lw1 > 710.0:
        return math.inf
    return qr.value * math.exp(lw1)


def _fit_slope(s_vals: np.ndarray, ratios: np.ndarray) -> float | None:
    mask = ratios > 0.0
    if mask.sum() < 3:
        return None
    return float(np.polyfit(np.log(s_vals[mask]), np.log(ratios[mask]), 1)[0])


def _growth(ratios: np.ndarray, boundary: str) -> float:
    """Ratio growth from the geometric middle of the grid to a boundary."""
    base = float(ratios[ratios.size // 2])
    outer = float(ratios[-1] if boundary == "high" else ratios[0])
    if base <= 0.0:
        return math.inf if outer > 0.0 else 0.0
    return outer / base


def certify(inst: ProblemInstance,
            s_min: float = DEFAULT_S_MIN,
            s_max: float = DEFAULT_S_MAX,
            points_per_decade: int = DEFAULT_POINTS_PER_DECADE,
            *, self_check: bool = False) -> BoundednessVerdict:
    """Decide the boundedness criterion by grid evaluation.

    A divergent kernel moment settles the matter immediately.  Otherwise the
    ratio Phi(s)/w1(s) is sampled on the log grid; any divergent Phi yields
    PhiInfinite with that s.  The log-log slope of the ratio is then fitted
    over the outermost decade at each end; a slope beyond +-0.05 pointing at
    a boundary combined with growth by more than a factor 10 across the
    outermost three decades yields RatioUnbounded.  Otherwise the verdict is
    Bounded with the grid supremum as norm estimate, sharpened by a
    golden-section pass around the maximizing grid point (kept only when it
    does not fall below the grid maximum).
    """
    m = moment(inst.psi, inst.quad_tol)
    if math.isinf(m):
        return BoundednessVerdict(status="MomentInfinite",
                                  witness={"reason": "kernel moment diverges"},
                                  moment=m)
    s_vals = log_grid(s_min, s_max, points_per_decade)
    ratios = np.empty_like(s_vals)
    for i, s in enumerate(s_vals):
        qr = _ratio_quad(inst, float(s), self_check=self_check)
        if qr.diverged:
            return BoundednessVerdict(
                status="PhiInfinite",
                witness={"s": float(s), "detail": qr.note},
                s_values=s_vals[:i], ratio_values=ratios[:i].copy(), moment=m)
        ratios[i] = qr.value

    high = s_vals >= s_vals[-1] / 10.0
    low = s_vals <= s_vals[0] * 10.0
    slope_high = _fit_slope(s_vals[high], ratios[high])
    slope_low = _fit_slope(s_vals[low], ratios[low])
    if slope_high is not None and slope_high > SLOPE_THRESHOLD \
            and _growth(ratios, "high") > GROWTH_FACTOR:
        return BoundednessVerdict(
            status="RatioUnbounded",
            witness={"direction": "s->inf", "exponent": slope_high},
            s_values=s_vals, ratio_values=ratios, moment=m)
    if slope_low is not None and slope_low < -SLOPE_THRESHOLD \
            and _growth(ratios, "low") > GROWTH_FACTOR:
        return BoundednessVerdict(
            status="RatioUnbounded",
            witness={"direction": "s->0+", "exponent": -slope_low},
            s_values=s_vals, ratio_values=ratios, moment=m)

    i = int(np.argmax(ratios))
    best_s = float(s_vals[i])
    best_ratio = float(ratios[i])
    if 0 < i < s_vals.size - 1 and best_ratio > 0.0:
        lo, hi = math.log(s_vals[i - 1]), math.log(s_vals[i + 1])

        def objective(ls: float) -> float:
            qr = _ratio_quad(inst, math.exp(ls))
            return -math.inf if qr.diverged else qr.value

        ls_star = _golden_max(objective, lo, hi, iters=40)
        refined = objective(ls_star)
        if refined > best_ratio:
            best_s, best_ratio = math.exp(ls_star), refined
            idx = int(np.searchsorted(s_vals, best_s))
            s_vals = np.insert(s_vals, idx, best_s)
            ratios = np.insert(ratios, idx, best_ratio)
    return BoundednessVerdict(status="Bounded", norm_estimate=best_ratio,
                              witness=None, s_values=s_vals,
                              ratio_values=ratios, moment=m)


def phi_profile(inst: ProblemInstance, s_min: float = DEFAULT_S_MIN,
                s_max: float = DEFAULT_S_MAX,
                points_per_decade: int = DEFAULT_POINTS_PER_DECADE,
                *, self_check: bool = False) -> PhiProfile:
    """Tabulate Phi and the ratio for reporting; divergent entries become inf."""
    s_vals = log_grid(s_min, s_max, points_per_decade)
    ratios = np.empty_like(s_vals)
    phis = np.empty_like(s_vals)
    for i, s in enumerate(s_vals):
        qr = _ratio_quad(inst, float(s), self_check=self_check)
        if qr.diverged:
            ratios[i] = math.inf
            phis[i] = math.inf
        else:
            ratios[i] = qr.value
            lw1 = inst.omega1.log_eval(float(s))
            with np.errstate(over="ignore"):
                phis[i] = qr.value * math.exp(lw1) if lw1 <= 710.0 else math.inf
    return PhiProfile(s_values=s_vals, phi_values=phis, ratio_values=ratios)
