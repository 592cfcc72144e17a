"""Heintze's criterion for solvable Lie algebras and curvature of left-invariant Finsler metrics."""

from .curvature import (
    FlagSpec,
    LeftInvariantMetric,
    flag_curvature,
    growth_constant_check,
    riemannian_sectional,
    scan_flags,
    u_vector,
    witness_nonnegative,
)
from .errors import InputError, NegcurvError, NotApplicableError, NumericalError
from .heintze import check_heintze, classify_growth, exp_poly_growth_witness, graded_spectra
from .lie_core import (
    StructureConstants,
    bracket,
    change_basis,
    descending_sequence,
    induced_endomorphism,
    is_solvable,
    killing_form,
    spectrum,
    validate,
)
from .minkowski import CustomNorm, RandersNorm, RiemannianNorm, fundamental_tensor, validate_norm
from .submersion import LinearSubmersion, horizontal_lift, induced_norm, isometry_check

__version__ = "0.1.0"

__all__ = [
    "CustomNorm",
    "FlagSpec",
    "InputError",
    "LeftInvariantMetric",
    "LinearSubmersion",
    "NegcurvError",
    "NotApplicableError",
    "NumericalError",
    "RandersNorm",
    "RiemannianNorm",
    "StructureConstants",
    "bracket",
    "change_basis",
    "check_heintze",
    "classify_growth",
    "descending_sequence",
    "exp_poly_growth_witness",
    "flag_curvature",
    "fundamental_tensor",
    "graded_spectra",
    "growth_constant_check",
    "horizontal_lift",
    "induced_endomorphism",
    "induced_norm",
    "is_solvable",
    "isometry_check",
    "killing_form",
    "riemannian_sectional",
    "scan_flags",
    "spectrum",
    "u_vector",
    "validate",
    "validate_norm",
    "witness_nonnegative",
]
