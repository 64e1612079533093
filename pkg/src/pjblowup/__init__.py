"""Blowup laboratory for the damped generalized Proudman-Johnson equation
with the three-point boundary condition u(1)=u_x(0)=u_x(1)=0."""

from .errors import DomainError
from .special_fn import e1, e1_scaled, eta
from .damping import DampingProfile, parse_damping
from .certificates import (
    BlowupCertificate,
    ComparisonContext,
    certify_bounded,
    certify_unbounded,
    certify_yuen,
    riccati_blowup_time,
)
from .pde_solver import ProblemParams, SolverConfig, build_initial, run

__all__ = [
    "DomainError",
    "e1",
    "e1_scaled",
    "eta",
    "DampingProfile",
    "parse_damping",
    "BlowupCertificate",
    "ComparisonContext",
    "certify_bounded",
    "certify_unbounded",
    "certify_yuen",
    "riccati_blowup_time",
    "ProblemParams",
    "SolverConfig",
    "build_initial",
    "run",
]

__version__ = "0.1.0"
