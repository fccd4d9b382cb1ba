"""Two-particle momentum correlations for anyons from incoherent 2D sources."""
from .correlator import (
    CorrelationCurve,
    QuadraturePolicy,
    c2_closed_form,
    c2_monte_carlo,
    c2_point,
    scan,
)
from .errors import ConvergenceError, DomainError, QuadratureError, TruncationError
from .kernel import KernelEvaluation, kernel_full, kernel_k0
from .sources import RadialSource, check_normalization, density, sample_r
from .special_functions import BesselAccuracy, bessel_j, log_gamma
from .wavefunction import (
    AnyonParameter,
    RelativeCoordinate,
    TruncationPolicy,
    exact_phi_squared,
    phi_squared,
)

__version__ = "0.1.0"
