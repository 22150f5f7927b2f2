"""Extension of the averaging operator to measures with point masses.

A measure here is a finite list of atoms at non-negative locations plus an
optional absolutely continuous density.  Under the extended operator a point
mass at s > 0 maps to the explicit kernel psi(s/x)/x supported on [s, inf),
the mass at 0 maps to the kernel moment times a point mass at 0, and the
density part maps consistently with the function-level operator.  Atom
images are kept in closed form (kernel terms) and sampled only on demand, so
no resolution is lost at the jump x = s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundedness import _ratio_quad, _tail_ratio_quad, moment
from .operators import TestFunction, materialize_image, weighted_norm
from .weights import ProblemInstance, PsiProfile

__all__ = [
    "WeightedMeasure", "ExtensionResult", "KernelNormIdentity",
    "MinorantResult", "UndefinedExtensionError",
    "delta_kernel", "extend_apply", "kernel_norm_identity",
    "continuous_minorant", "measure_from_dict",
]


class UndefinedExtensionError(ValueError):
    """Extension requested for an infinite kernel moment with mass at zero."""


@dataclass(frozen=True)
class WeightedMeasure:
    """Finitely many atoms (location, mass) plus an optional density."""

    atoms: tuple = ()
    density: TestFunction | None = None

    def __post_init__(self):
        locs = [s for s, _ in self.atoms]
        if any(s < 0.0 or not math.isfinite(s) for s in locs):
            raise ValueError("atom locations must be finite and non-negative")
        if len(set(locs)) != len(locs):
            raise ValueError("atom locations must be distinct")
        if any(not math.isfinite(c) for _, c in self.atoms):
            raise ValueError("atom masses must be finite")
        object.__setattr__(self, "atoms",
                           tuple((float(s), float(c)) for s, c in self.atoms))

    @property
    def mass_at_zero(self) -> float:
        for s, c in self.atoms:
            if s == 0.0:
                return c
        return 0.0

    @property
    def positive_atoms(self) -> tuple:
        return tuple((s, c) for s, c in self.atoms if s > 0.0)

    @classmethod
    def point_mass(cls, s: float, c: float = 1.0) -> "WeightedMeasure":
        return cls(atoms=((float(s), float(c)),))

    @classmethod
    def from_density(cls, f: TestFunction) -> "WeightedMeasure":
        return cls(density=f)

    def scaled(self, a: float) -> "WeightedMeasure":
        dens = self.density.scaled(a) if self.density is not None else None
        return WeightedMeasure(atoms=tuple((s, a * c) for s, c in self.atoms),
                               density=dens)

    def to_dict(self) -> dict:
        out = {"atoms": [{"s": s, "c": c} for s, c in self.atoms]}
        if self.density is not None:
            out["density"] = self.density.to_dict()
        return out


def measure_from_dict(d: dict) -> WeightedMeasure:
    atoms = tuple((float(a["s"]), float(a["c"])) for a in d.get("atoms", []))
    density = None
    if d.get("density") is not None:
        density = TestFunction.from_dict(d["density"])
    return WeightedMeasure(atoms=atoms, density=density)


def delta_kernel(inst: ProblemInstance, s: float, x):
    """Image density of a unit point mass at s: psi(s/x)/x on [s, inf), else 0."""
    if s <= 0.0:
        raise ValueError("atom location must be positive")
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr <= 0.0):
        raise ValueError("evaluation requires x > 0")
    ratio = np.minimum(s / arr, 1.0)
    out = np.where(arr >= s, inst.psi._eval(ratio) / arr, 0.0)
    return float(out[0]) if scalar else out


@dataclass
class ExtensionResult:
    """Image of a measure: an integrable part plus a point mass at 0.

    ``atom_terms`` stores the kernel images (location, mass) symbolically;
    ``density_image`` is the sampled image of the density part.  Evaluation
    combines both exactly at any x.
    """

    delta0_coefficient: float
    atom_terms: tuple
    density_image: TestFunction | None
    instance: ProblemInstance

    def l1_part(self, x):
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.zeros_like(arr)
        for s, c in self.atom_terms:
            out = out + c * delta_kernel(self.instance, s, arr)
        if self.density_image is not None:
            out = out + self.density_image.eval(arr)
        return float(out[0]) if scalar else out

    def l1_sampled(self, lo: float = 1e-6, hi: float = 1e6,
                   n: int = 400) -> TestFunction:
        xs = np.logspace(math.log10(lo), math.log10(hi), n)
        return TestFunction.sampled(xs, self.l1_part(xs))

    def to_dict(self) -> dict:
        return {"delta0_coefficient": self.delta0_coefficient,
                "kernel_terms": [{"s": s, "c": c} for s, c in self.atom_terms],
                "has_density_image": self.density_image is not None}


def extend_apply(inst: ProblemInstance, mu: WeightedMeasure) -> ExtensionResult:
    """Apply the extended operator to a measure.

    Requires the measure to have finite weighted variation against the
    source weight.  An infinite kernel moment combined with mass at 0 leaves
    the extension undefined.
    """
    m = moment(inst.psi, inst.quad_tol)
    c0 = mu.mass_at_zero
    if math.isinf(m) and c0 != 0.0:
        raise UndefinedExtensionError(
            "infinite kernel moment: the image of the mass at 0 is undefined")
    total = sum(abs(c) * inst.omega1.eval(s) for s, c in mu.positive_atoms)
    if not math.isfinite(total):
        raise ValueError("measure has infinite weighted variation")
    if mu.density is not None:
        dnorm = weighted_norm(mu.density, inst.omega1, inst.quad_tol)
        if dnorm.diverged:
            raise ValueError("density part has infinite weighted norm")
    density_image = None
    if mu.density is not None:
        density_image = materialize_image(inst, mu.density)
    return ExtensionResult(
        delta0_coefficient=m * c0 if c0 != 0.0 else 0.0,
        atom_terms=mu.positive_atoms,
        density_image=density_image,
        instance=inst)


@dataclass
class KernelNormIdentity:
    kernel_norm: float
    phi_value: float
    rel_gap: float

    def to_dict(self) -> dict:
        return {"kernel_norm": self.kernel_norm, "phi_value": self.phi_value,
                "rel_gap": self.rel_gap}


def kernel_norm_identity(inst: ProblemInstance, s: float,
                         tol: float | None = None) -> KernelNormIdentity:
    """Weighted norm of the point-mass image against the criterion integral.

    The norm, the integral of w2(x) psi(s/x)/x from s to infinity, and the
    unit-interval criterion integral are the same quantity through the
    substitution x = s/t; computing both independently and reporting the
    relative gap cross-validates the quadrature paths.
    """
    if s <= 0.0:
        raise ValueError("s must be positive")
    kr = _tail_ratio_quad(inst, s, tol)
    pr = _ratio_quad(inst, s, tol)
    if kr.diverged or pr.diverged:
        return KernelNormIdentity(math.inf, math.inf, math.nan)
    lw1 = inst.omega1.log_eval(s)
    scale = math.exp(lw1) if lw1 <= 710.0 else math.inf
    gap = abs(kr.value - pr.value) / max(abs(kr.value), abs(pr.value), 1e-300)
    return KernelNormIdentity(kernel_norm=kr.value * scale,
                              phi_value=pr.value * scale, rel_gap=gap)


@dataclass
class MinorantResult:
    profile: PsiProfile
    moment_gap: float

    def to_dict(self) -> dict:
        return {"profile": self.profile.to_dict(), "moment_gap": self.moment_gap}


def _piecewise_jumps(nodes, values):
    """Indices i where nodes[i] == nodes[i+1] (encoded jumps)."""
    return [i for i in range(len(nodes) - 1) if nodes[i] == nodes[i + 1]]


def _ramp_piecewise(psi: PsiProfile, delta: float) -> PsiProfile:
    """Continuous minorant of a piecewise profile: jumps become linear ramps."""
    nodes = list(psi.nodes)
    values = list(psi.values)
    out_nodes: list[float] = []
    out_values: list[float] = []
    i = 0
    while i < len(nodes):
        if i + 1 < len(nodes) and nodes[i] == nodes[i + 1]:
            t0 = nodes[i]
            v_before, v_after = values[i], values[i + 1]
            if v_after > v_before:
                # upward jump: stay low, ramp up after t0
                nxt = nodes[i + 2] if i + 2 < len(nodes) else 1.0
                d = min(delta, max((nxt - t0) * 0.5, 1e-12))
                out_nodes.extend([t0, t0 + d])
                interp_v = np.interp(t0 + d, nodes, values)
                out_values.extend([v_before, float(interp_v)])
            else:
                # downward jump: ramp down ahead of t0
                prev = out_nodes[-1] if out_nodes else 0.0
                d = min(delta, max((t0 - prev) * 0.5, 1e-12))
                if out_nodes and out_nodes[-1] >= t0 - d:
                    out_nodes.append(t0)
                    out_values.append(v_after)
                else:
                    interp_v = np.interp(t0 - d, nodes, values)
                    out_nodes.extend([t0 - d, t0])
                    out_values.extend([min(float(interp_v), values[i]), v_after])
            i += 2
        else:
            out_nodes.append(nodes[i])
            out_values.append(values[i])
            i += 1
    if out_nodes[0] != 0.0:
        out_nodes.insert(0, 0.0)
        out_values.insert(0, out_values[0])
    if out_nodes[-1] != 1.0:
        out_nodes.append(1.0)
        out_values.append(out_values[-1])
    # enforce strictly increasing nodes after ramping
    cleaned_n, cleaned_v = [out_nodes[0]], [out_values[0]]
    for t, v in zip(out_nodes[1:], out_values[1:]):
        if t > cleaned_n[-1]:
            cleaned_n.append(t)
            cleaned_v.append(v)
        else:
            cleaned_v[-1] = min(cleaned_v[-1], v)
    return PsiProfile.piecewise_linear(cleaned_n, cleaned_v)


def _as_piecewise(psi: PsiProfile) -> PsiProfile:
    if psi.kind == "plateau":
        if psi.a == 0.0:
            raise ValueError("plateau reaching t = 0 has an infinite moment")
        return PsiProfile.piecewise_linear(
            (0.0, psi.a, psi.a, 1.0), (0.0, 0.0, psi.K, psi.K))
    if psi.kind == "piecewise_linear":
        return psi
    raise ValueError(
        "continuous minorants are constructed for plateau, piecewise_linear "
        "or scaled sums of those")


def continuous_minorant(psi: PsiProfile, eps: float,
                        tol: float = 1e-10) -> MinorantResult:
    """Continuous profile below psi whose moment falls short by at most eps.

    Each jump is replaced by a linear ramp whose width shrinks until the
    measured moment gap meets eps.  Continuous piecewise input comes back
    unchanged with gap 0.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    m = moment(psi, tol)
    if math.isinf(m):
        raise ValueError("minorant construction requires a finite moment")
    if psi.kind == "scaled_sum":
        active = [(c, p) for c, p in zip(psi.coefficients, psi.components) if c != 0.0]
        if not active:
            return MinorantResult(psi, 0.0)
        parts = [continuous_minorant(p, eps / (len(active) * c), tol)
                 for c, p in active]
        prof = PsiProfile.scaled_sum([c for c, _ in active],
                                     [r.profile for r in parts])
        gap = m - moment(prof, tol)
        return MinorantResult(prof, gap)
    base = _as_piecewise(psi)
    if not _piecewise_jumps(base.nodes, base.values):
        return MinorantResult(psi, 0.0)
    # analytic first guess: a ramp of width delta at a jump of height dv
    # located at t0 costs at most dv * delta / t0 of moment
    delta = eps
    for i in _piecewise_jumps(base.nodes, base.values):
        t0 = base.nodes[i]
        dv = abs(base.values[i + 1] - base.values[i])
        if t0 > 0.0 and dv > 0.0:
            delta = min(delta, eps * t0 / dv)
    for _ in range(60):
        candidate = _ramp_piecewise(base, delta)
        gap = m - moment(candidate, tol)
        if gap <= eps:
            return MinorantResult(candidate, max(gap, 0.0))
        delta *= 0.5
    raise RuntimeError("ramp width refinement failed to meet the moment gap")
