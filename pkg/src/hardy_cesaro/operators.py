"""Concrete test functions, the averaging operator, its adjoint and norms.

Closed-form test functions are finite sums of terms
coef * x^p * (1+x)^r * exp(q x + q2 x^2) * 1_{x <= cutoff}; the family covers
constants, monomials, exponentials, truncated indicators and their products,
and it is closed under the pointwise scaling and addition the linearity
checks need.  The (1+x)^r and x^2-rate factors exist so that a weight can be
wrapped as a test function (the adjoint applied to the target weight must
reproduce the criterion integral).  Sampled test functions interpolate
values linearly against log x and vanish outside their abscissa range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import boundedness
from .quadrature import QuadResult, integrate_tail, integrate_unit
from .weights import ProblemInstance, Weight

__all__ = [
    "Term", "TestFunction", "BoundCheck", "PairingDivergedError",
    "apply_U", "apply_adjoint", "weighted_norm", "duality_gap",
    "bound_check", "materialize_image", "random_test_pair",
]

#: left endpoint splitting the half-line norm into head and tail pieces
_HEAD_SPLIT = 1e-8
_IMAGE_GRID_POINTS = 400
_IMAGE_GRID_RANGE = (1e-6, 1e6)


class PairingDivergedError(ValueError):
    """A duality pairing failed to converge."""


@dataclass(frozen=True)
class Term:
    coef: float
    power: float = 0.0
    one_plus_power: float = 0.0
    rate: float = 0.0
    rate2: float = 0.0
    cutoff: float | None = None

    def eval(self, x):
        with np.errstate(over="ignore", under="ignore", divide="ignore",
                         invalid="ignore"):
            out = np.full_like(x, self.coef)
            if self.power != 0.0:
                out = out * x ** self.power
            if self.one_plus_power != 0.0:
                out = out * (1.0 + x) ** self.one_plus_power
            if self.rate != 0.0 or self.rate2 != 0.0:
                out = out * np.exp(self.rate * x + self.rate2 * x * x)
            if self.cutoff is not None:
                out = np.where(x <= self.cutoff, out, 0.0)
        return out

    def to_dict(self) -> dict:
        return {"coef": self.coef, "power": self.power,
                "one_plus_power": self.one_plus_power, "rate": self.rate,
                "rate2": self.rate2, "cutoff": self.cutoff}

    @classmethod
    def from_dict(cls, d: dict) -> "Term":
        return cls(coef=float(d.get("coef", 1.0)),
                   power=float(d.get("power", 0.0)),
                   one_plus_power=float(d.get("one_plus_power", 0.0)),
                   rate=float(d.get("rate", 0.0)),
                   rate2=float(d.get("rate2", 0.0)),
                   cutoff=None if d.get("cutoff") is None else float(d["cutoff"]))


@dataclass(frozen=True)
class TestFunction:
    """A function on (0, inf), either closed form or a sampled table."""

    __test__ = False  # not a pytest class, despite the name

    kind: str
    terms: tuple = ()
    x: tuple = ()
    values: tuple = ()
    support_bound: float | None = None

    def __post_init__(self):
        if self.kind == "closed_form":
            if any(not isinstance(t, Term) for t in self.terms):
                raise ValueError("closed_form terms must be Term instances")
            if self.support_bound is None and self.terms \
                    and all(t.cutoff is not None for t in self.terms):
                object.__setattr__(self, "support_bound",
                                   max(t.cutoff for t in self.terms))
        elif self.kind == "sampled":
            xs = np.asarray(self.x, dtype=float)
            vs = np.asarray(self.values, dtype=float)
            if xs.size < 2 or xs.size != vs.size:
                raise ValueError("sampled function needs matching abscissae and values")
            if np.any(xs <= 0.0) or np.any(np.diff(xs) <= 0.0):
                raise ValueError("sampled abscissae must be positive and increasing")
            if not np.all(np.isfinite(vs)):
                raise ValueError("sampled values must be finite")
            object.__setattr__(self, "x", tuple(float(v) for v in xs))
            object.__setattr__(self, "values", tuple(float(v) for v in vs))
            object.__setattr__(self, "_lxs", np.log(xs))
            object.__setattr__(self, "_vs", vs)
            if self.support_bound is None:
                object.__setattr__(self, "support_bound", float(xs[-1]))
        else:
            raise ValueError(f"unknown test function kind {self.kind!r}")

    # -- constructors ---------------------------------------------------------
    @classmethod
    def closed_form(cls, *terms: Term) -> "TestFunction":
        return cls(kind="closed_form", terms=tuple(terms))

    @classmethod
    def constant(cls, c: float = 1.0) -> "TestFunction":
        return cls.closed_form(Term(coef=float(c)))

    @classmethod
    def monomial(cls, p: float, coef: float = 1.0) -> "TestFunction":
        return cls.closed_form(Term(coef=float(coef), power=float(p)))

    @classmethod
    def exponential(cls, q: float, coef: float = 1.0) -> "TestFunction":
        return cls.closed_form(Term(coef=float(coef), rate=float(q)))

    @classmethod
    def indicator(cls, b: float, height: float = 1.0) -> "TestFunction":
        return cls.closed_form(Term(coef=float(height), cutoff=float(b)))

    @classmethod
    def zero(cls) -> "TestFunction":
        return cls.closed_form(Term(coef=0.0))

    @classmethod
    def from_weight(cls, w: Weight, coef: float = 1.0) -> "TestFunction":
        """Wrap a parametric weight as a closed-form test function."""
        if w.kind != "parametric":
            raise ValueError("only parametric weights convert to closed form")
        return cls.closed_form(Term(coef=float(coef), power=w.a,
                                    one_plus_power=w.b, rate=w.c, rate2=w.d))

    @classmethod
    def sampled(cls, xs, values) -> "TestFunction":
        return cls(kind="sampled", x=tuple(xs), values=tuple(values))

    # -- algebra (closed forms only) -------------------------------------------
    def scaled(self, c: float) -> "TestFunction":
        if self.kind != "closed_form":
            raise ValueError("scaling is implemented for closed forms only")
        return TestFunction.closed_form(
            *(Term(t.coef * c, t.power, t.one_plus_power, t.rate, t.rate2, t.cutoff)
              for t in self.terms))

    def plus(self, other: "TestFunction") -> "TestFunction":
        if self.kind != "closed_form" or other.kind != "closed_form":
            raise ValueError("addition is implemented for closed forms only")
        return TestFunction.closed_form(*(self.terms + other.terms))

    # -- evaluation ---------------------------------------------------------------
    def eval(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if self.kind == "closed_form":
            out = np.zeros_like(arr)
            for t in self.terms:
                out = out + t.eval(arr)
        else:
            with np.errstate(divide="ignore"):
                lx = np.log(arr)
            out = np.interp(lx, self._lxs, self._vs, left=0.0, right=0.0)
        return float(out[0]) if scalar else out

    def x_breakpoints(self) -> list[float]:
        """Jump locations useful as quadrature seeds."""
        if self.kind == "closed_form":
            return sorted({t.cutoff for t in self.terms if t.cutoff is not None})
        return [self.x[0], self.x[-1]]

    def to_dict(self) -> dict:
        if self.kind == "closed_form":
            return {"kind": "closed_form",
                    "terms": [t.to_dict() for t in self.terms]}
        return {"kind": "sampled", "x": list(self.x), "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "TestFunction":
        kind = d.get("kind")
        if kind == "closed_form":
            return cls.closed_form(*(Term.from_dict(t) for t in d.get("terms", [])))
        if kind == "sampled":
            return cls.sampled(d["x"], d["values"])
        raise ValueError(f"unknown test function kind {kind!r}")


# -- operator application ------------------------------------------------------------

def _unit_seeds(points) -> list[float]:
    return [p for p in points if 0.0 < p < 1.0]


def apply_U(inst: ProblemInstance, f: TestFunction, x: float) -> float:
    """Averaged image (integral over (0, 1] of f(t x) psi(t) dt) at one x."""
    x = float(x)
    if x <= 0.0:
        raise ValueError("x must be positive")
    psi = inst.psi

    def integrand(t):
        return f.eval(t * x) * psi._eval(t)

    seeds = _unit_seeds([b / x for b in f.x_breakpoints()]
                        + list(psi.breakpoints()))
    qr = integrate_unit(integrand, inst.quad_tol, breakpoints=seeds)
    return math.inf if qr.diverged else qr.value


def apply_adjoint(inst: ProblemInstance, h: TestFunction, x: float,
                  form: str = "unit") -> float:
    """Adjoint image at x.

    The default unit form integrates h(x/t) psi(t)/t over (0, 1] and reuses
    the singularity-aware path; the tail form integrates h(s) psi(x/s)/s
    from x upward and is exactly zero beyond the support of h.
    """
    x = float(x)
    if x <= 0.0:
        raise ValueError("x must be positive")
    psi = inst.psi
    b = h.support_bound
    if form == "tail":
        if b is not None and x > b:
            return 0.0

        def integrand(s):
            return h.eval(s) * psi._eval(np.minimum(x / s, 1.0)) / s

        seeds = [p for p in h.x_breakpoints() if p > x]
        qr = integrate_tail(integrand, x, inst.quad_tol, breakpoints=seeds)
        return math.inf if qr.diverged else qr.value
    if form != "unit":
        raise ValueError("form must be 'unit' or 'tail'")

    def integrand(t):
        return h.eval(x / t) * psi._eval(t) / t

    seeds = _unit_seeds([x / p for p in h.x_breakpoints() if p > 0.0]
                        + list(psi.breakpoints()))
    qr = integrate_unit(integrand, inst.quad_tol, breakpoints=seeds)
    return math.inf if qr.diverged else qr.value


def _halfline_integral(density, tol: float, seeds=None) -> QuadResult:
    """Integral of a vectorized density over (0, inf): head piece plus tail."""
    tail = integrate_tail(density, _HEAD_SPLIT, tol,
                          breakpoints=[p for p in (seeds or []) if p > _HEAD_SPLIT])

    def head_integrand(tau):
        return _HEAD_SPLIT * density(_HEAD_SPLIT * tau)

    head = integrate_unit(head_integrand, tol)
    return QuadResult(
        value=head.value + tail.value,
        abs_error_estimate=head.abs_error_estimate + tail.abs_error_estimate,
        panels_used=head.panels_used + tail.panels_used,
        diverged=head.diverged or tail.diverged,
        note=tail.note or head.note)


def weighted_norm(f: TestFunction, w: Weight, tol: float = 1e-8) -> QuadResult:
    """Weighted L1 norm of f, the integral of |f| w over the half-line.

    The diverged flag reports non-integrability.
    """
    def density(x):
        return np.abs(f.eval(x)) * w.eval(x)

    return _halfline_integral(density, tol, seeds=f.x_breakpoints())


def duality_gap(inst: ProblemInstance, f: TestFunction, h: TestFunction,
                tol: float = 1e-8) -> float:
    """Relative mismatch of the two duality pairings.

    <Uf, h> and <f, U*h> are computed as independent plain integrals over
    (0, inf), the operator images evaluated pointwise by nested quadrature.
    """
    inner = inst.with_tol(min(inst.quad_tol, tol / 10.0))

    def lhs_density(xv):
        images = np.array([apply_U(inner, f, float(xx)) for xx in xv])
        return images * h.eval(xv)

    def rhs_density(xv):
        images = np.array([apply_adjoint(inner, h, float(xx)) for xx in xv])
        return f.eval(xv) * images

    lhs = _halfline_integral(lhs_density, tol, seeds=h.x_breakpoints())
    rhs = _halfline_integral(rhs_density, tol, seeds=f.x_breakpoints())
    if lhs.diverged or rhs.diverged:
        raise PairingDivergedError("a duality pairing failed to converge")
    return abs(lhs.value - rhs.value) / (1.0 + abs(lhs.value))


def materialize_image(inst: ProblemInstance, f: TestFunction,
                      n: int = _IMAGE_GRID_POINTS,
                      lo: float = _IMAGE_GRID_RANGE[0],
                      hi: float = _IMAGE_GRID_RANGE[1]) -> TestFunction:
    """Sample the averaged image of f on a log grid as a sampled function."""
    xs = np.logspace(math.log10(lo), math.log10(hi), n)
    vals = np.array([apply_U(inst, f, float(x)) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise PairingDivergedError("averaged image diverges on the sampling grid")
    return TestFunction.sampled(xs, vals)


def random_test_pair(rng, inst: ProblemInstance) -> tuple[TestFunction, TestFunction]:
    """Seeded (f, h) pair: compactly supported f, h dominated by the target weight."""
    f = TestFunction.closed_form(Term(
        coef=float(rng.uniform(0.3, 2.0)),
        power=float(rng.uniform(0.0, 2.0)),
        cutoff=float(rng.uniform(0.5, 4.0))))
    w2 = inst.omega2
    # decay at least as fast as any exponential envelope of the target weight
    base_rate = -w2.c if (w2.kind == "parametric" and w2.c < 0.0) else 0.0
    h = TestFunction.closed_form(Term(
        coef=float(rng.uniform(0.3, 2.0)),
        rate=-(base_rate + float(rng.uniform(0.2, 1.5)))))
    return f, h


@dataclass
class BoundCheck:
    lhs: float
    rhs: float
    ok: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ok": self.ok}


def bound_check(inst: ProblemInstance, f: TestFunction,
                verdict: "boundedness.BoundednessVerdict | None" = None) -> BoundCheck:
    """Check the norm inequality: target norm of the image against estimate.

    The image is materialized on the standard log grid before its norm is
    taken, so the left side carries sampling error of order 1e-3 relative;
    the comparison allows for that.
    """
    if verdict is None:
        verdict = boundedness.certify(inst)
    if not verdict.bounded:
        raise ValueError("bound_check needs a Bounded certification")
    image = materialize_image(inst, f)
    lhs = weighted_norm(image, inst.omega2, inst.quad_tol)
    rhs_norm = weighted_norm(f, inst.omega1, inst.quad_tol)
    if lhs.diverged or rhs_norm.diverged:
        raise ValueError("weighted norm diverged in bound_check")
    rhs = verdict.norm_estimate * rhs_norm.value
    return BoundCheck(lhs=lhs.value, rhs=rhs, ok=lhs.value <= rhs * (1.0 + 1e-3))
