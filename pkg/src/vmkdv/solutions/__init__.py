"""Closed-form soliton and breather solutions over the zero background."""

from .backlund import BacklundResult, backlund_residual
from .breather import (
    BreatherParams,
    breather_bcd,
    breather_darboux,
    breather_darboux_from_residue,
    breather_dress,
    breather_dress_from_residue,
    breather_dress_kernel,
    breather_fgh,
    breather_m0,
    breather_q,
    breather_residue,
    compatible_breather_params,
    kernel_factor,
    orthonormal_breather,
    orthonormal_breather_component,
    orthonormal_breather_gradient,
    orthonormal_breather_params,
    rank1_breather,
    rank1_delta,
    rank1_delta_closed_form,
)
from .errors import (
    AxisPole,
    ConstraintViolation,
    DegenerateDenominator,
    MaximalIsotropicRank,
    NonRealOutput,
    PoleEvaluation,
    SingularD,
    SingularH,
)
from .soliton import (
    SolitonParams,
    backlund_branch,
    dressing_apply,
    one_soliton,
    one_soliton_time_derivative,
    one_soliton_x_derivatives,
    projector,
    soliton_darboux,
    soliton_darboux_from_projector,
    soliton_q,
)
from .times import TimeVector, fundamental_solution, reduction_q, rotation_block, spectral_phase, xi
