"""Sequential and multi-timescale feedback optimization for dynamical plants."""

from .algorithms import (
    ALGORITHMS,
    ProblemSpec,
    RunConfig,
    TrajectoryLog,
    composite_gradient,
    project_box,
    run_ideal_fo,
    run_sfo,
    run_smtfo,
)
from .certificates import (
    Certificate,
    RegularityConstants,
    build_certificate,
    design_stepsize,
    estimate_constants,
    lemma2_output_error_bound,
    spectral_radius_2x2,
)
from .errors import (
    AssumptionViolation,
    CertificateError,
    ConvergenceError,
    DimensionError,
    EvaluationError,
    SeqFOError,
    SingularityError,
)
from .kernels import BACKEND
from .plant import (
    LinearizationResult,
    Plant,
    SensitivityMatrix,
    exact_steady_jacobian,
    finite_diff_jacobian,
    linearize,
    sensitivity,
    steady_state,
)

__all__ = [
    "ALGORITHMS", "AssumptionViolation", "BACKEND", "Certificate", "CertificateError",
    "ConvergenceError", "DimensionError", "EvaluationError", "LinearizationResult",
    "Plant", "ProblemSpec", "RegularityConstants", "RunConfig", "SensitivityMatrix",
    "SeqFOError", "SingularityError", "TrajectoryLog", "build_certificate",
    "composite_gradient", "design_stepsize", "estimate_constants",
    "exact_steady_jacobian", "finite_diff_jacobian", "lemma2_output_error_bound",
    "linearize", "project_box", "run_ideal_fo", "run_sfo", "run_smtfo",
    "sensitivity", "spectral_radius_2x2", "steady_state",
]
