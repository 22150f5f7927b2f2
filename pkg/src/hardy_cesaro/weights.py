"""Weight functions on (0, inf) and averaging profiles on [0, 1].

Weights come in a four-parameter family x^a (1+x)^b exp(c x + d x^2), which
covers polynomial growth or decay together with (super-)exponential
envelopes, plus a tabulated kind interpolated log-linearly inside the table
and extrapolated as a power law beyond it.  Profiles (the averaging kernel
on [0, 1]) come in five kinds.  Both expose logarithmic evaluation next to
plain evaluation so the integrators can combine factors of extreme magnitude
inside a single exponential.

Continuity at x = 0 is not required of weights; the domain is the open
half-line and callers that need a value at 0 must check finiteness
themselves.  All objects are immutable after construction and safe for
concurrent read-only use.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "Weight", "PsiProfile", "ProblemInstance", "WeightOverflowWarning",
    "OVERFLOW_SENTINEL", "weight_eval", "psi_eval",
    "weight_from_dict", "psi_from_dict", "instance_from_dict", "load_instance",
]

#: plain evaluation saturates here instead of overflowing
OVERFLOW_SENTINEL = 1.0e300
_UNDERFLOW_FLOOR = 1.0e-300
_NEG_INF = float("-inf")
_CHECK_GRID = np.logspace(-8.0, 8.0, 1000)
_UNIT_GRID = np.linspace(0.0, 1.0, 1000)


class WeightOverflowWarning(RuntimeWarning):
    """Plain weight evaluation saturated at OVERFLOW_SENTINEL."""


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


@dataclass(frozen=True)
class Weight:
    """A positive continuous weight on the open half-line.

    ``parametric`` evaluates x^a (1+x)^b exp(c x + d x^2); ``tabulated``
    interpolates a strictly increasing positive table log-linearly and
    extends the two end segments as power laws.  ``monotonicity_tag`` is a
    caller-supplied claim ("increasing", "decreasing" or "none") verified by
    sampling at construction.
    """

    kind: str
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0
    d: float = 0.0
    abscissae: tuple = ()
    values: tuple = ()
    monotonicity_tag: str = "none"

    def __post_init__(self):
        if self.kind not in ("parametric", "tabulated"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.monotonicity_tag not in ("increasing", "decreasing", "none"):
            raise ValueError(f"unknown monotonicity tag {self.monotonicity_tag!r}")
        if self.kind == "tabulated":
            xs = np.asarray(self.abscissae, dtype=float)
            ys = np.asarray(self.values, dtype=float)
            if xs.size < 2 or xs.size != ys.size:
                raise ValueError("tabulated weight needs two or more (x, value) pairs")
            if np.any(xs <= 0.0) or np.any(np.diff(xs) <= 0.0):
                raise ValueError("tabulated abscissae must be positive and strictly increasing")
            if np.any(ys <= 0.0) or not np.all(np.isfinite(ys)):
                raise ValueError("tabulated values must be positive and finite")
            object.__setattr__(self, "abscissae", tuple(float(v) for v in xs))
            object.__setattr__(self, "values", tuple(float(v) for v in ys))
            object.__setattr__(self, "_xs", xs)
            object.__setattr__(self, "_ys", ys)
            object.__setattr__(self, "_lxs", np.log(xs))
            object.__setattr__(self, "_lys", np.log(ys))
        else:
            for name in ("a", "b", "c", "d"):
                if not math.isfinite(getattr(self, name)):
                    raise ValueError(f"parametric exponent {name} must be finite")
        self._self_check()

    # -- construction helpers -------------------------------------------------
    @classmethod
    def parametric(cls, a=0.0, b=0.0, c=0.0, d=0.0, monotonicity_tag="none") -> "Weight":
        return cls(kind="parametric", a=float(a), b=float(b), c=float(c),
                   d=float(d), monotonicity_tag=monotonicity_tag)

    @classmethod
    def tabulated(cls, abscissae, values, monotonicity_tag="none") -> "Weight":
        return cls(kind="tabulated", abscissae=tuple(abscissae),
                   values=tuple(values), monotonicity_tag=monotonicity_tag)

    @classmethod
    def one(cls) -> "Weight":
        return cls.parametric(0.0, 0.0, 0.0, 0.0)

    # -- evaluation ------------------------------------------------------------
    def log_eval(self, x):
        """log w(x), exact for any representable x > 0 (never saturates)."""
        arr, scalar = _as_array(x)
        if np.any(arr <= 0.0):
            raise ValueError("weight evaluation requires x > 0")
        if self.kind == "parametric":
            out = np.zeros_like(arr)
            if self.a != 0.0:
                out = out + self.a * np.log(arr)
            if self.b != 0.0:
                out = out + self.b * np.log1p(arr)
            if self.c != 0.0:
                out = out + self.c * arr
            if self.d != 0.0:
                with np.errstate(over="ignore"):
                    out = out + self.d * arr * arr
            return _ret(out, scalar)
        lx = np.log(arr)
        out = np.interp(lx, self._lxs, self._lys)
        lo, hi = self._lxs[0], self._lxs[-1]
        left = lx < lo
        if np.any(left):
            slope = (self._lys[1] - self._lys[0]) / (self._lxs[1] - self._lxs[0])
            out = np.where(left, self._lys[0] + slope * (lx - lo), out)
        right = lx > hi
        if np.any(right):
            slope = (self._lys[-1] - self._lys[-2]) / (self._lxs[-1] - self._lxs[-2])
            out = np.where(right, self._lys[-1] + slope * (lx - hi), out)
        return _ret(out, scalar)

    def eval(self, x):
        """w(x); values outside [1e-300, 1e300] saturate (overflow warns)."""
        arr, scalar = _as_array(x)
        with np.errstate(over="ignore", under="ignore"):
            out = np.exp(np.asarray(self.log_eval(arr)))
        if self.kind == "tabulated":
            # table nodes reproduce their stored values exactly
            idx = np.searchsorted(self._xs, arr)
            idx = np.minimum(idx, self._xs.size - 1)
            exact = self._xs[idx] == arr
            out = np.where(exact, self._ys[idx], out)
        high = out > OVERFLOW_SENTINEL
        if np.any(high):
            warnings.warn("weight evaluation overflowed; saturating at the sentinel",
                          WeightOverflowWarning, stacklevel=2)
            out = np.where(high, OVERFLOW_SENTINEL, out)
        out = np.maximum(out, _UNDERFLOW_FLOOR)
        return _ret(out, scalar)

    # -- construction-time sampling checks --------------------------------------
    def _self_check(self):
        logs = np.asarray(self.log_eval(_CHECK_GRID))
        if np.any(np.isnan(logs)) or np.any(logs == math.inf):
            raise ValueError("weight is not positive and finite on the check grid")
        if self.monotonicity_tag != "none":
            diffs = np.diff(logs)
            tol = 1e-12 * np.maximum(1.0, np.abs(logs[:-1]))
            if self.monotonicity_tag == "increasing" and np.any(diffs < -tol):
                raise ValueError("weight is not increasing on the check grid")
            if self.monotonicity_tag == "decreasing" and np.any(diffs > tol):
                raise ValueError("weight is not decreasing on the check grid")

    # -- serialization -----------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "parametric":
            return {"kind": "parametric", "a": self.a, "b": self.b,
                    "c": self.c, "d": self.d,
                    "monotonicity_tag": self.monotonicity_tag}
        return {"kind": "tabulated", "abscissae": list(self.abscissae),
                "values": list(self.values),
                "monotonicity_tag": self.monotonicity_tag}


@dataclass(frozen=True)
class PsiProfile:
    """Non-negative averaging kernel on [0, 1].

    Kinds: ``power`` (t^alpha, alpha > 0), ``gauss_essential``
    (exp(-1/t^2), continuously extended by 0 at t = 0), ``plateau``
    (K on [a, 1], 0 below, K > 0, a < 1), ``piecewise_linear`` (nodes on
    [0, 1]; repeated nodes encode jumps) and ``scaled_sum`` (non-negative
    combination of the others).  ``moment_cache`` holds the once-computed
    value of the kernel moment integral over (0, 1] of psi(t)/t.
    """

    kind: str
    alpha: float = 0.0
    K: float = 0.0
    a: float = 0.0
    nodes: tuple = ()
    values: tuple = ()
    coefficients: tuple = ()
    components: tuple = ()

    def __post_init__(self):
        if self.kind == "power":
            if not (self.alpha > 0.0):
                raise ValueError("power profile requires alpha > 0")
        elif self.kind == "gauss_essential":
            pass
        elif self.kind == "plateau":
            if not (self.K > 0.0):
                raise ValueError("plateau profile requires K > 0")
            if not (0.0 <= self.a < 1.0):
                raise ValueError("plateau profile requires 0 <= a < 1")
        elif self.kind == "piecewise_linear":
            ts = np.asarray(self.nodes, dtype=float)
            vs = np.asarray(self.values, dtype=float)
            if ts.size < 2 or ts.size != vs.size:
                raise ValueError("piecewise profile needs matching nodes and values")
            if ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) < 0.0):
                raise ValueError("piecewise nodes must run non-decreasing from 0 to 1")
            if np.any(vs < 0.0) or not np.all(np.isfinite(vs)):
                raise ValueError("piecewise values must be non-negative and finite")
            object.__setattr__(self, "nodes", tuple(float(v) for v in ts))
            object.__setattr__(self, "values", tuple(float(v) for v in vs))
            object.__setattr__(self, "_ts", ts)
            object.__setattr__(self, "_vs", vs)
        elif self.kind == "scaled_sum":
            if len(self.coefficients) != len(self.components) or not self.components:
                raise ValueError("scaled_sum needs matching coefficients and components")
            if any(c < 0.0 or not math.isfinite(c) for c in self.coefficients):
                raise ValueError("scaled_sum coefficients must be non-negative and finite")
            if any(not isinstance(p, PsiProfile) for p in self.components):
                raise ValueError("scaled_sum components must be profiles")
        else:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "_moment_cache", [None])
        # sampled non-negativity check
        vals = np.asarray(self.eval(_UNIT_GRID))
        if np.any(vals < 0.0) or np.any(np.isnan(vals)):
            raise ValueError("profile is not non-negative on the check grid")

    # -- construction helpers --------------------------------------------------
    @classmethod
    def power(cls, alpha: float) -> "PsiProfile":
        return cls(kind="power", alpha=float(alpha))

    @classmethod
    def gauss_essential(cls) -> "PsiProfile":
        return cls(kind="gauss_essential")

    @classmethod
    def plateau(cls, K: float, a: float) -> "PsiProfile":
        return cls(kind="plateau", K=float(K), a=float(a))

    @classmethod
    def piecewise_linear(cls, nodes, values) -> "PsiProfile":
        return cls(kind="piecewise_linear", nodes=tuple(nodes), values=tuple(values))

    @classmethod
    def scaled_sum(cls, coefficients, components) -> "PsiProfile":
        return cls(kind="scaled_sum", coefficients=tuple(float(c) for c in coefficients),
                   components=tuple(components))

    @classmethod
    def zero(cls) -> "PsiProfile":
        return cls.piecewise_linear((0.0, 1.0), (0.0, 0.0))

    # -- evaluation --------------------------------------------------------------
    def eval(self, t):
        arr, scalar = _as_array(t)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("profile evaluation requires t in [0, 1]")
        out = self._eval(arr)
        return _ret(out, scalar)

    def _eval(self, arr):
        if self.kind == "power":
            return arr ** self.alpha
        if self.kind == "gauss_essential":
            out = np.zeros_like(arr)
            m = arr > 1e-150
            if np.any(m):
                out[m] = np.exp(-arr[m] ** -2.0)
            return out
        if self.kind == "plateau":
            return np.where(arr >= self.a, self.K, 0.0)
        if self.kind == "piecewise_linear":
            return np.interp(arr, self._ts, self._vs)
        out = np.zeros_like(arr)
        for c, p in zip(self.coefficients, self.components):
            if c != 0.0:
                out = out + c * p._eval(arr)
        return out

    def log_eval(self, t):
        """log psi(t); -inf where the profile vanishes."""
        arr, scalar = _as_array(t)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("profile evaluation requires t in [0, 1]")
        return _ret(self._log_eval(arr), scalar)

    def _log_eval(self, arr):
        with np.errstate(divide="ignore"):
            if self.kind == "power":
                return self.alpha * np.log(arr)
            if self.kind == "gauss_essential":
                out = np.full_like(arr, _NEG_INF)
                m = arr > 1e-150
                if np.any(m):
                    out[m] = -arr[m] ** -2.0
                return out
            if self.kind == "plateau":
                return np.where(arr >= self.a, math.log(self.K), _NEG_INF)
            if self.kind == "piecewise_linear":
                return np.log(np.interp(arr, self._ts, self._vs))
        logs = []
        for c, p in zip(self.coefficients, self.components):
            if c != 0.0:
                logs.append(math.log(c) + p._log_eval(arr))
        if not logs:
            return np.full_like(arr, _NEG_INF)
        stack = np.stack(logs)
        top = np.max(stack, axis=0)
        out = np.full_like(arr, _NEG_INF)
        m = top > _NEG_INF
        if np.any(m):
            with np.errstate(invalid="ignore"):
                out[m] = top[m] + np.log(np.sum(np.exp(stack[:, m] - top[m]), axis=0))
        return out

    def breakpoints(self) -> tuple[float, ...]:
        """Interior t-locations where the profile jumps or kinks.

        Quadrature callers seed panel boundaries here so that every panel
        sees a smooth integrand.
        """
        if self.kind == "plateau":
            return (self.a,) if self.a > 0.0 else ()
        if self.kind == "piecewise_linear":
            return tuple(sorted({float(t) for t in self._ts if 0.0 < t < 1.0}))
        if self.kind == "scaled_sum":
            pts: set[float] = set()
            for p in self.components:
                pts.update(p.breakpoints())
            return tuple(sorted(pts))
        return ()

    # -- moment cache -------------------------------------------------------------
    @property
    def cached_moment(self):
        return self._moment_cache[0]

    def _store_moment(self, value: float):
        self._moment_cache[0] = float(value)

    # -- serialization --------------------------------------------------------------
    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "alpha": self.alpha}
        if self.kind == "gauss_essential":
            return {"kind": "gauss_essential"}
        if self.kind == "plateau":
            return {"kind": "plateau", "K": self.K, "a": self.a}
        if self.kind == "piecewise_linear":
            return {"kind": "piecewise_linear", "nodes": list(self.nodes),
                    "values": list(self.values)}
        return {"kind": "scaled_sum", "coefficients": list(self.coefficients),
                "components": [p.to_dict() for p in self.components]}


@dataclass(frozen=True)
class ProblemInstance:
    """One operator setting: kernel profile psi plus source and target weights."""

    psi: PsiProfile
    omega1: Weight
    omega2: Weight
    quad_tol: float = 1e-8

    def __post_init__(self):
        if not (self.quad_tol > 0.0):
            raise ValueError("quad_tol must be positive")

    def with_tol(self, tol: float) -> "ProblemInstance":
        return ProblemInstance(self.psi, self.omega1, self.omega2, float(tol))

    def to_dict(self) -> dict:
        return {"psi": self.psi.to_dict(), "omega1": self.omega1.to_dict(),
                "omega2": self.omega2.to_dict(), "quad_tol": self.quad_tol}


# -- module-level operation wrappers -------------------------------------------------

def weight_eval(w: Weight, x):
    """w(x) for x > 0; non-positive x raises ValueError."""
    return w.eval(x)


def psi_eval(p: PsiProfile, t):
    """psi(t) for t in [0, 1]; out-of-range t raises ValueError."""
    return p.eval(t)


# -- JSON parsing ----------------------------------------------------------------------

def _require(d: dict, key: str, where: str):
    if key not in d:
        raise ValueError(f"{where}: missing field {key!r}")
    return d[key]


def weight_from_dict(d: dict, where: str = "weight") -> Weight:
    kind = _require(d, "kind", where)
    tag = d.get("monotonicity_tag", "none")
    if kind == "parametric":
        return Weight.parametric(d.get("a", 0.0), d.get("b", 0.0),
                                 d.get("c", 0.0), d.get("d", 0.0),
                                 monotonicity_tag=tag)
    if kind == "tabulated":
        return Weight.tabulated(_require(d, "abscissae", where),
                                _require(d, "values", where),
                                monotonicity_tag=tag)
    raise ValueError(f"{where}: unknown weight kind {kind!r}")


def psi_from_dict(d: dict, where: str = "psi") -> PsiProfile:
    kind = _require(d, "kind", where)
    if kind == "power":
        return PsiProfile.power(_require(d, "alpha", where))
    if kind == "gauss_essential":
        return PsiProfile.gauss_essential()
    if kind == "plateau":
        return PsiProfile.plateau(_require(d, "K", where), _require(d, "a", where))
    if kind == "piecewise_linear":
        return PsiProfile.piecewise_linear(_require(d, "nodes", where),
                                           _require(d, "values", where))
    if kind == "scaled_sum":
        comps = [psi_from_dict(c, f"{where}.components[{i}]")
                 for i, c in enumerate(_require(d, "components", where))]
        return PsiProfile.scaled_sum(_require(d, "coefficients", where), comps)
    raise ValueError(f"{where}: unknown profile kind {kind!r}")


def instance_from_dict(d: dict) -> ProblemInstance:
    return ProblemInstance(
        psi=psi_from_dict(_require(d, "psi", "instance"), "psi"),
        omega1=weight_from_dict(_require(d, "omega1", "instance"), "omega1"),
        omega2=weight_from_dict(_require(d, "omega2", "instance"), "omega2"),
        quad_tol=float(d.get("quad_tol", 1e-8)),
    )


def load_instance(path) -> ProblemInstance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
