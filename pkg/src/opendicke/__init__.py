"""Linearized two-cavity open Dicke model near a dissipative critical point.

Mean-field steady states, drift/diffusion matrices, Lyapunov covariances,
drift spectra, exceptional-point diagnostics, noise spectra and
critical-exponent fits.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DegenerateModel,
    DomainError,
    InsufficientData,
    NonPositiveValue,
    NotHurwitz,
    NumericalFailure,
    OpenDickeError,
    SingularResolvent,
    TruncationWarning,
)
from .model import (  # noqa: E402
    DriftDiffusion,
    MeanFieldState,
    ModelParams,
    Phase,
    critical_coupling,
    diffusion_matrix,
    drift_diffusion,
    drift_matrix,
    ep_detuning,
    mean_field_residual,
    mean_field_steady_state,
    validate_params,
)
from .scaling import (  # noqa: E402
    ExponentReport,
    PowerLawFit,
    Side,
    SweepDataset,
    SweepSpec,
    exponent_report,
    fit_power_law,
    sweep,
)
from .spectral import (  # noqa: E402
    DefectReport,
    SpectrumResult,
    asymptotic_decay_rate,
    eigen_spectrum,
    ep_defect,
    slow_mode_approx,
)
from .steady import (  # noqa: E402
    CovarianceMatrix,
    NoiseSpectrum,
    covariance_integral_oracle,
    noise_spectrum,
    number_fluctuations,
    purity,
    quadrature_moments,
    solve_lyapunov,
)
