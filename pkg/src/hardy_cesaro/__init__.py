"""Numerical laboratory for averaging operators between weighted L1 spaces.

The operator under study maps f to x -> integral over (0, 1] of
f(t x) psi(t) dt, with a non-negative kernel profile psi on [0, 1] and
positive continuous weights on the half-line defining the source and target
spaces.  The package evaluates and certifies the boundedness criterion,
applies the operator and its adjoint, extends it to measures with point
masses, and exhibits the weak-star escape of its representing kernels.
"""

from .boundedness import (BoundednessVerdict, PhiProfile, SelfCheckError,
                          certify, moment, phi, phi_profile)
from .measures import (ExtensionResult, KernelNormIdentity, MinorantResult,
                       UndefinedExtensionError, WeightedMeasure,
                       continuous_minorant, delta_kernel, extend_apply,
                       kernel_norm_identity, measure_from_dict)
from .operators import (BoundCheck, PairingDivergedError, Term, TestFunction,
                        apply_U, apply_adjoint, bound_check, duality_gap,
                        materialize_image, weighted_norm)
from .quadrature import (EvaluationError, QuadResult, integrate_tail,
                         integrate_unit)
from .weakcompact import (ConcentrationReport, RhoKernel, SingularWeightError,
                          default_g_suite, pairing, rho_norm,
                          weak_star_limit_check)
from .weights import (OVERFLOW_SENTINEL, ProblemInstance, PsiProfile, Weight,
                      WeightOverflowWarning, instance_from_dict, load_instance,
                      psi_eval, weight_eval)

__version__ = "0.1.0"

__all__ = [
    "BoundednessVerdict", "PhiProfile", "SelfCheckError", "certify", "moment",
    "phi", "phi_profile", "ExtensionResult", "KernelNormIdentity",
    "MinorantResult", "UndefinedExtensionError", "WeightedMeasure",
    "continuous_minorant", "delta_kernel", "extend_apply",
    "kernel_norm_identity", "measure_from_dict", "BoundCheck",
    "PairingDivergedError", "Term", "TestFunction", "apply_U", "apply_adjoint",
    "bound_check", "duality_gap", "materialize_image", "weighted_norm",
    "EvaluationError", "QuadResult", "integrate_tail", "integrate_unit",
    "ConcentrationReport", "RhoKernel", "SingularWeightError",
    "default_g_suite", "pairing", "rho_norm", "weak_star_limit_check",
    "OVERFLOW_SENTINEL", "ProblemInstance", "PsiProfile", "Weight",
    "WeightOverflowWarning", "instance_from_dict", "load_instance", "psi_eval",
    "weight_eval", "__version__",
]
