"""Exact-solution synthesis and cross-verification for the Euler-Poisson /
generalized Hunter-Saxton pair: Laplace and Ovsiannikov invariants, the
first-order substitution cascade that integrates the linear equation in
quadratures, the contact transformation linking the two equations, and an
independent finite-difference residual harness."""

from .contact import (
    DegenerateSolutionError,
    ImageConditionError,
    PushforwardSolution,
    TildedJet1,
    UnattainableTargetError,
    psi_forward,
    psi_inverse,
    pullback_check,
    pushforward_evaluate,
    pushforward_field,
)
from .fields import (
    FieldEvaluationError,
    GridSpec,
    Jet1,
    Jet2,
    Point,
    ScalarField,
    SingularDomainError,
    VerifyReport,
    fd_jet,
    fd_jet1,
    field_from_expr,
    grid_verify,
    residual_ep,
    residual_hs,
)
from .laplace import (
    AntiderivativeTable,
    HyperbolicCoeffs,
    InvariantUndefinedError,
    OvsiannikovInvariants,
    SemiInvariants,
    SolutionSpec,
    antiderivative_pair,
    cascade_w_field,
    ep_coeffs,
    ep_trans_coeffs,
    general_solution_u,
    general_solution_v,
    linear_residual,
    ovsiannikov_invariants,
    parametric_hs_solution,
    semi_invariants,
    u_to_v,
    v_to_u,
    v_to_w,
    w_ode_residual,
    without_exact_partials,
)
from .quadrature import QuadratureError, adaptive_simpson

__version__ = "0.1.0"
