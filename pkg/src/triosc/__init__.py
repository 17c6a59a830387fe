"""Quantum statistics of three bosonic modes coupled by one parametric
amplifier and two frequency converters."""

__version__ = "0.1.0"

from .dynamics import (
    CouplingParams,
    ModeCoefficients,
    general_coefficients,
    special_case_coefficients,
    swap_transform,
    verify_identities,
)
from .errors import (
    ConvergenceError,
    InvalidInputError,
    NMaxTooSmallError,
    TrioscError,
    TruncationError,
    UndefinedValueError,
    UnsupportedRegimeError,
)
from .moments import InitialState, Letter, ladder_word, mean_photon_number, moment, multimode_moment
from .phasespace import (
    characteristic_function,
    joint_wigner,
    photon_number_distribution,
    single_mode_wigner,
    single_mode_wigner_closed,
    single_mode_wigner_numeric,
)
from .statistics import cauchy_schwarz_factor, g2, quadrature_squeezing, sum_squeezing

__all__ = [
    "CouplingParams",
    "ModeCoefficients",
    "general_coefficients",
    "special_case_coefficients",
    "swap_transform",
    "verify_identities",
    "ConvergenceError",
    "InvalidInputError",
    "NMaxTooSmallError",
    "TrioscError",
    "TruncationError",
    "UndefinedValueError",
    "UnsupportedRegimeError",
    "InitialState",
    "Letter",
    "ladder_word",
    "mean_photon_number",
    "moment",
    "multimode_moment",
    "characteristic_function",
    "joint_wigner",
    "photon_number_distribution",
    "single_mode_wigner",
    "single_mode_wigner_closed",
    "single_mode_wigner_numeric",
    "cauchy_schwarz_factor",
    "g2",
    "quadrature_squeezing",
    "sum_squeezing",
]
