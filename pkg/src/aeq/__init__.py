"""aeq: constructive asymptotic equivalence for perturbed ODE systems.

The toolkit builds the decay matrix Psi of the perturbation, realizes the
solution-space homeomorphism as a constant matrix, certifies the improper
integrals behind the hypotheses with analytic tail envelopes, and
classifies trajectories as (asymptotically / biasymptotically) almost
periodic against supplied trigonometric signals.
"""

from .almostperiodic import APSignal, DecompositionReport, classify, \
    find_translation_numbers, translation_error
from .biasymptotic import (ParityReport, biequivalence_report, check_parity,
                           psi_two_sided, symmetry_deviation)
from .certificates import (TailCertificate, find_smallness_point, fit_K,
                           tail_integral, validate_certificate)
from .equivalence import (EquivalenceMap, build_map, check_C2,
                          equivalence_report, map_solution)
from .errors import (AeqError, BoundViolationError, GlueMismatchError,
                     InputError, IntegrationFailure, NonConvergenceError,
                     ScenarioError, SingularMatrixError)
from .matrixfn import MatrixFunction, fro
from .odes import (FundamentalMatrix, Trajectory, fundamental_matrix,
                   integrate, inverse_at, mat_exp)
from .psi import PsiSolution, agreement, build_P, psi_backward, psi_residual, \
    psi_series
from .quasilinear import (Forcing, ForcingTerm, QuasiState, SpectralData,
                          asymptotic_representation, c_u_limit, check_C3,
                          check_C4, check_C5, check_yakubovich,
                          compare_yakubovich, integrate_u, spectral_data)
from .scenario import Scenario, builtin, parse, serialize
from .terms import Term

__version__ = "0.1.0"

__all__ = [
    "APSignal", "AeqError", "BoundViolationError", "DecompositionReport",
    "EquivalenceMap", "Forcing", "ForcingTerm", "FundamentalMatrix",
    "GlueMismatchError", "InputError", "IntegrationFailure", "MatrixFunction",
    "NonConvergenceError", "ParityReport", "PsiSolution", "QuasiState",
    "Scenario", "ScenarioError", "SingularMatrixError", "SpectralData",
    "TailCertificate", "Term", "Trajectory", "agreement",
    "asymptotic_representation", "biequivalence_report", "build_P", "build_map",
    "builtin", "c_u_limit", "check_C2", "check_C3", "check_C4", "check_C5",
    "check_parity", "check_yakubovich", "classify", "compare_yakubovich",
    "equivalence_report", "find_smallness_point", "find_translation_numbers",
    "fit_K", "fro", "fundamental_matrix", "integrate", "integrate_u",
    "inverse_at", "map_solution", "mat_exp", "parse", "psi_backward",
    "psi_residual", "psi_series", "psi_two_sided", "serialize",
    "spectral_data", "symmetry_deviation", "tail_integral",
    "translation_error", "validate_certificate",
]
