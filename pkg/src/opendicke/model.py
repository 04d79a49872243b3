"""Two-cavity open Dicke model: parameters, mean field and linearization.

All mean-field quantities are intensive: condensates are stored as
``alpha_j / sqrt(N)`` and spin components as ``S^i / N``, so ``N`` never
appears.  Fluctuations are ordered ``(dx1, dp1, dx2, dp2, xb, pb)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateModel, DomainError

__all__ = [
    "ModelParams",
    "Phase",
    "MeanFieldState",
    "DriftDiffusion",
    "validate_params",
    "critical_coupling",
    "ep_detuning",
    "mean_field_steady_state",
    "mean_field_residual",
    "drift_matrix",
    "diffusion_matrix",
    "drift_diffusion",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters in intensive units.

    Attributes
    ----------
    omega : float
        Atomic transition frequency.
    kappa : float
        Mean photon loss rate of the two cavities.
    delta_kappa : float
        Loss asymmetry; cavity 1 decays at ``kappa - delta_kappa`` and
        cavity 2 at ``kappa + delta_kappa``.
    delta : float
        Cavity detuning (cavity 2 is detuned by ``-delta``).
    g : float
        Cavity-spin coupling.
    """

    omega: float
    kappa: float
    delta_kappa: float
    delta: float
    g: float = 0.0

    def __post_init__(self):
        for name in ("omega", "kappa", "delta_kappa", "delta", "g"):
            value = getattr(self, name)
            if not isinstance(value, (int, float, np.floating, np.integer)) or isinstance(value, bool):
                raise DomainError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.omega <= 0:
            raise DomainError(f"omega must be > 0, got {self.omega}")
        if self.kappa <= 0:
            raise DomainError(f"kappa must be > 0, got {self.kappa}")
        if self.delta_kappa <= 0:
            raise DomainError(
                f"delta_kappa must be > 0 (delta_kappa = {self.delta_kappa} "
                "makes the critical coupling divergent)"
            )
        if self.delta_kappa >= self.kappa:
            raise DomainError(
                f"delta_kappa must be < kappa (kappa - delta_kappa = "
                f"{self.kappa - self.delta_kappa} leaves cavity 1 non-dissipative)"
            )
        if self.delta <= 0:
            raise DomainError(f"delta must be > 0, got {self.delta}")
        if self.g < 0:
            raise DomainError(f"g must be >= 0, got {self.g}")

    @property
    def kappa_minus(self) -> float:
        return self.kappa - self.delta_kappa

    @property
    def kappa_plus(self) -> float:
        return self.kappa + self.delta_kappa

    def with_g(self, g: float) -> "ModelParams":
        return replace(self, g=g)


def validate_params(omega, kappa, delta_kappa, delta, g=0.0) -> ModelParams:
    """Build a :class:`ModelParams`, raising :class:`DomainError` on bad input."""
    return ModelParams(omega, kappa, delta_kappa, delta, g)


def _d_factor(p: ModelParams) -> float:
    # |(kappa_- + i delta)(kappa_+ - i delta)|^2
    return 4 * p.delta**2 * p.delta_kappa**2 + (p.delta**2 + p.kappa**2 - p.delta_kappa**2) ** 2


def critical_coupling(params: ModelParams) -> float:
    """Coupling at which the normal-phase drift matrix becomes singular."""
    p = params
    return 0.25 * math.sqrt(p.omega * _d_factor(p) / (p.delta * p.kappa * p.delta_kappa))


def ep_detuning(kappa: float, delta_kappa: float) -> float:
    """Detuning that makes the critical point an exceptional point.

    Only depends on the losses; the atomic frequency drops out.
    """
    if not (math.isfinite(kappa) and math.isfinite(delta_kappa)):
        raise DomainError("kappa and delta_kappa must be finite")
    if not kappa > delta_kappa > 0:
        raise DomainError(
            f"ep_detuning requires kappa > delta_kappa > 0, got kappa={kappa}, "
            f"delta_kappa={delta_kappa}"
        )
    root = math.sqrt(kappa**2 - delta_kappa**2)
    return math.sqrt(kappa**2 - delta_kappa**2 + 2 * kappa * root)


class Phase(str, enum.Enum):
    NORMAL = "normal"
    SUPERRADIANT = "superradiant"


@dataclass(frozen=True)
class MeanFieldState:
    phase: Phase
    theta: float
    alpha1: complex
    alpha2: complex
    sx: float
    sy: float
    sz: float
    branch: int = 1


def _check_branch(branch: int) -> int:
    if branch not in (1, -1):
        raise DomainError(f"branch must be +1 or -1, got {branch!r}")
    return int(branch)


def _condensates(p: ModelParams, sx: float) -> tuple[complex, complex]:
    den = complex(p.delta**2 + p.kappa**2 - p.delta_kappa**2, 2 * p.delta * p.delta_kappa)
    alpha1 = 2 * p.g * sx * complex(-p.delta, -p.kappa_plus) / den
    alpha2 = 2 * p.g * sx * complex(p.kappa_minus, p.delta) / den
    return alpha1, alpha2


def mean_field_steady_state(params: ModelParams, branch: int = 1) -> MeanFieldState:
    """Steady state of the first-moment equations.

    ``g <= g_c`` gives the normal state.  Above threshold the spin tilts by
    ``theta`` with ``cos(theta) = (g_c / g)**2`` and the sign of ``S^x`` is
    set by ``branch``.
    """
    branch = _check_branch(branch)
    g_c = critical_coupling(params)
    if params.g <= g_c:
        return MeanFieldState(Phase.NORMAL, 0.0, 0j, 0j, 0.0, 0.0, -0.5, branch)

    cos_t = (g_c / params.g) ** 2
    sin_t = branch * math.sqrt(1.0 - cos_t**2)
    sx = 0.5 * sin_t
    alpha1, alpha2 = _condensates(params, sx)
    return MeanFieldState(
        phase=Phase.SUPERRADIANT,
        theta=math.atan2(abs(sin_t), cos_t),
        alpha1=alpha1,
        alpha2=alpha2,
        sx=sx,
        sy=0.0,
        sz=-0.5 * cos_t,
        branch=branch,
    )


def mean_field_residual(params: ModelParams, state: MeanFieldState) -> np.ndarray:
    """Right-hand sides of the first-moment equations in intensive form.

    Returns ``[Re a1', Im a1', Re a2', Im a2', sx', sy', sz']``.
    """
    p = params
    a1, a2 = complex(state.alpha1), complex(state.alpha2)
    field = a1.real + a2.imag
    da1 = -complex(p.kappa_minus, p.delta) * a1 - 2j * p.g * state.sx
    da2 = -complex(p.kappa_plus, -p.delta) * a2 + 2 * p.g * state.sx
    dsx = -p.omega * state.sy
    dsy = p.omega * state.sx - 4 * p.g * state.sz * field
    dsz = 4 * p.g * state.sy * field
    return np.array([da1.real, da1.imag, da2.real, da2.imag, dsx, dsy, dsz])


def _effective_couplings(p: ModelParams, state: MeanFieldState) -> tuple[float, float]:
    cos_t = math.cos(state.theta)
    # sin(theta) carries the branch sign, matching the sign of sx
    sin_t = 2.0 * state.sx
    a1, a2 = complex(state.alpha1), complex(state.alpha2)
    omega_eff = p.omega * cos_t - 4 * p.g * sin_t * (a1.real + a2.imag)
    return omega_eff, p.g * cos_t


def drift_matrix(params: ModelParams, state: MeanFieldState) -> np.ndarray:
    omega_eff, g_eff = _effective_couplings(params, state)
    if not omega_eff > 0:
        raise DegenerateModel(f"effective magnon frequency {omega_eff} is not positive")
    km, kp, dl = params.kappa_minus, params.kappa_plus, params.delta
    gg = 2 * g_eff
    return np.array(
        [
            [-km, dl, 0.0, 0.0, 0.0, 0.0],
            [-dl, -km, 0.0, 0.0, -gg, 0.0],
            [0.0, 0.0, -kp, -dl, gg, 0.0],
            [0.0, 0.0, dl, -kp, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, omega_eff],
            [-gg, 0.0, 0.0, -gg, -omega_eff, 0.0],
        ]
    )


def diffusion_matrix(params: ModelParams) -> np.ndarray:
    km, kp = params.kappa_minus, params.kappa_plus
    return np.diag([km, km, kp, kp, 0.0, 0.0])


@dataclass(frozen=True)
class DriftDiffusion:
    a: np.ndarray
    d: np.ndarray
    omega_eff: float
    g_eff: float


def drift_diffusion(params: ModelParams, branch: int = 1) -> DriftDiffusion:
    """Mean field plus linearization in one call."""
    state = mean_field_steady_state(params, branch)
    omega_eff, g_eff = _effective_couplings(params, state)
    return DriftDiffusion(
        a=drift_matrix(params, state),
        d=diffusion_matrix(params),
        omega_eff=omega_eff,
        g_eff=g_eff,
    )
