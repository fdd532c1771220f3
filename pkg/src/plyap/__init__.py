"""Eigenvalues, Lyapunov-type inequalities and homogenization for weighted one-dimensional p-Laplacians."""

__version__ = "0.1.0"

from .errors import (
    DegenerateDenominatorError,
    DomainError,
    IntegrationError,
    NoEigenvalueError,
    PlyapError,
    ResourceError,
    SearchError,
    UnsupportedCoefficientError,
)
from .higher_order import BeamProblem, assemble, smallest_positive_eigenvalue, verify_lyapi2
from .homog import SweepConfig, SweepResult, limit_eigenvalue, sweep
from .lyapunov import (
    BoundReport,
    bound_classical,
    bound_higher_order,
    bound_lyapi,
    bound_lyapu,
    bounds_harris_kong,
    taylor_embedding_constant,
)
from .pmath import PExponent, conjugate, phi_p, pi_p, pi_p_closed_form
from .shooting import EigenPair, ProblemSpec, eigenvalue, eigenvalues, integrate_ivp, rayleigh_quotient
from .transform import build_transform, transformed_weight
from .weights import PiecewiseWeight, evaluate, primitive, rescale_periodic, split_parts

__all__ = [
    "__version__",
    "BeamProblem",
    "BoundReport",
    "DegenerateDenominatorError",
    "DomainError",
    "EigenPair",
    "IntegrationError",
    "NoEigenvalueError",
    "PExponent",
    "PiecewiseWeight",
    "PlyapError",
    "ProblemSpec",
    "ResourceError",
    "SearchError",
    "SweepConfig",
    "SweepResult",
    "UnsupportedCoefficientError",
    "assemble",
    "bound_classical",
    "bound_higher_order",
    "bound_lyapi",
    "bound_lyapu",
    "bounds_harris_kong",
    "build_transform",
    "conjugate",
    "eigenvalue",
    "eigenvalues",
    "evaluate",
    "integrate_ivp",
    "limit_eigenvalue",
    "phi_p",
    "pi_p",
    "pi_p_closed_form",
    "primitive",
    "rayleigh_quotient",
    "rescale_periodic",
    "smallest_positive_eigenvalue",
    "split_parts",
    "sweep",
    "taylor_embedding_constant",
    "transformed_weight",
    "verify_lyapi2",
]
