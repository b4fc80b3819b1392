"""Stochastic Galerkin matrices for parameter-dependent diffusion, block
preconditioners built by modifying the stochastic couplings, and guaranteed
two-sided bounds for the spectra of the preconditioned operators."""

from .basis import MultiIndexSet, StochasticMatrix, assemble_G, assemble_G_tilde, make_index_set
from .bounds import (
    ClassicalBounds,
    SpectralBounds,
    cbs_and_gs2,
    classical_bounds,
    element_equivalence_oracle,
    mean_based_bounds,
    splitting_bounds_complete,
    splitting_bounds_tp,
    truncated_bounds,
)
from .config import ExperimentConfig, load_config, parse_config, serialize_config
from .eigsolve import EigEstimate, extreme_eigs, extreme_eigs_generalized, pcg
from .errors import (
    ConfigError,
    ConvergenceError,
    CoefficientError,
    DominanceError,
    EnclosureError,
    ExprEvalError,
    ExprSyntaxError,
    FactorizationError,
    ParameterDomainError,
    SgprecondError,
    SizeError,
    UsageError,
)
from .fem import (
    CoefficientField,
    Mesh,
    assemble_F,
    build_mesh,
    compute_mu,
    element_stiffness,
    load_coefficient_table,
    load_vector,
    mu_from_exprs,
    sample_coefficients,
)
from .operator import (
    GAUSS_SEIDEL_2,
    MEAN_BASED,
    SPLITTING_COMPLETE,
    SPLITTING_TP,
    TRUNCATED_TP,
    DiscreteProblem,
    GalerkinOperator,
    Preconditioner,
    apply_inverse,
    assemble_dense,
    build_preconditioner,
    matvec,
)
from .orthopoly import (
    DSequence,
    GaussRule,
    JacobiMatrix,
    RecurrenceFamily,
    chebyshev_u,
    d_last_via_quadrature,
    d_sequence,
    family_from_name,
    gauss_rule,
    gegenbauer,
    h_extreme_eigs,
    hermite,
    jacobi_matrix,
    legendre,
    max_root,
    mu_bar,
    recurrence_coeffs,
    tridiag_eigenvalues,
)

__version__ = "0.1.0"
