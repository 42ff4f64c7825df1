"""Exact invariants of toric plurisubharmonic weights: Zhou weights, relative types,
jumping numbers, multiplier ideals, Tian functions and sublevel-set integrals."""

from .errors import (
    CapacityError,
    DomainError,
    PlurivalError,
    PreconditionError,
    ValidationError,
    VerificationError,
)
from .lattice import LinearProgram, MonomialIdeal, NewtonPolyhedron, lp_solve
from .weights import (
    DiagonalZhouWeight,
    ReferencePair,
    ToricWeight,
    compare_zhou,
    kiselman_number,
    lelong_number,
    relative_type,
    toric_maximality,
    weight_max,
    weight_sum,
    zhou_weight_for,
)
from .integrability import (
    JumpingQuery,
    divides,
    inclusion_equivalence,
    is_integrable,
    jumping_number,
    lct,
    multiplier_ideal,
    multiplier_membership,
    thmA_check,
    zhou_valuation,
)
from .tian import derivative_at_zero, threshold_b0, tian_function
from .integrals import (
    mass_asymptotics,
    ratio_convergence,
    sublevel_closed_form,
    sublevel_monte_carlo,
)
from .approximation import (
    approximant,
    envelope_identity_check,
    green_approximant,
    pointwise_convergence,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "DiagonalZhouWeight",
    "DomainError",
    "JumpingQuery",
    "LinearProgram",
    "MonomialIdeal",
    "NewtonPolyhedron",
    "PlurivalError",
    "PreconditionError",
    "ReferencePair",
    "ToricWeight",
    "ValidationError",
    "VerificationError",
    "approximant",
    "compare_zhou",
    "derivative_at_zero",
    "divides",
    "envelope_identity_check",
    "green_approximant",
    "inclusion_equivalence",
    "is_integrable",
    "jumping_number",
    "kiselman_number",
    "lct",
    "lelong_number",
    "lp_solve",
    "mass_asymptotics",
    "multiplier_ideal",
    "multiplier_membership",
    "pointwise_convergence",
    "ratio_convergence",
    "relative_type",
    "sublevel_closed_form",
    "sublevel_monte_carlo",
    "thmA_check",
    "threshold_b0",
    "tian_function",
    "toric_maximality",
    "weight_max",
    "weight_sum",
    "zhou_valuation",
    "zhou_weight_for",
]
