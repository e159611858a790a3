"""Rotation-invariant spectral functions of symmetric matrices and their derivatives."""
from .calculus import (DEFAULT_CONFIG, DividedDiffMode, EngineConfig, TermSum, apply_D,
                       apply_L, derivative_terms, diagnostics, dirderiv, divided_difference,
                       eigen_derivative, eval_F, gradient, hessian_apply)
from .dsl import DiagExpr, check_symmetry, evaluate, parse, partial
from .errors import (DomainError, ExprSyntaxError, InputError, NumericalError, OrderCapError,
                     SpecFnError)
from .linalg import (Flag, Spectrum, conjugate, delta_field, jacobi_eigh, rand_sym,
                     random_orthogonal, reconstruct, sym_with_spectrum, w_matrix)
from .newton import (PowerSumPoly, PowerSums, SymPoly, dr_dx_rows_check, esym_to_psums,
                     lift_polynomial, power_sums, vandermonde_jacobian)
from .oracle import DerivReport, FDConfig, fd_dirderiv, rel_err, run_suite
from .radial import RadialProfile, RadialTerm, delta_sphere, radial_bound_check, radial_dirderiv

__version__ = "0.1.0"
