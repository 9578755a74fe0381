"""Twin-beam entanglement in squeezed-thermal Gaussian channels."""

__version__ = "0.1.0"

from .channel import (
    BathSpec,
    DerivedBath,
    bath_from_nm,
    derive_bath,
    diffusion_matrix,
    evolve,
    sigma_squared,
    stationary_covariance,
)
from .errors import (
    DomainError,
    NumericalError,
    StructuralError,
    TruncationError,
    TwinBeamError,
    UnsupportedPathError,
)
from .separability import (
    PptReport,
    SurvivalResult,
    char_poly_profile,
    ppt_test,
    sigma_conditions,
    survival_time,
    survival_time_closed,
    survival_time_numeric,
)
from .states import TwinBeamParams, TwoModeGaussianState, physicality_check, twb_state, vacuum_state

__all__ = [
    "BathSpec",
    "DerivedBath",
    "DomainError",
    "NumericalError",
    "PptReport",
    "StructuralError",
    "SurvivalResult",
    "TruncationError",
    "TwinBeamError",
    "TwinBeamParams",
    "TwoModeGaussianState",
    "UnsupportedPathError",
    "bath_from_nm",
    "char_poly_profile",
    "derive_bath",
    "diffusion_matrix",
    "evolve",
    "physicality_check",
    "ppt_test",
    "sigma_conditions",
    "sigma_squared",
    "stationary_covariance",
    "survival_time",
    "survival_time_closed",
    "survival_time_numeric",
    "twb_state",
    "vacuum_state",
]
