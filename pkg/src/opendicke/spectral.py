"""Drift-matrix spectrum, decay rate, slow-mode asymptotics and EP diagnostics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalFailure
from .model import ModelParams, critical_coupling

__all__ = [
    "SpectrumResult",
    "DefectReport",
    "SlowModeApprox",
    "eigen_spectrum",
    "asymptotic_decay_rate",
    "slow_mode_approx",
    "ep_defect",
    "DEFAULT_RANK_TOL",
    "DEFAULT_SLOW_TOL_FACTOR",
]

DEFAULT_RANK_TOL = 1e-8
DEFAULT_SLOW_TOL_FACTOR = 1e-6


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues sorted slowest first, plus the asymptotic decay rate.

    Ordering is by descending real part, ties broken by descending
    imaginary part, so for a slow complex pair ``eigenvalues[0]`` carries
    the positive imaginary part.
    """

    eigenvalues: np.ndarray
    adr: float

    @property
    def slowest(self) -> complex:
        return complex(self.eigenvalues[0])


def _sort_slowest_first(values: np.ndarray) -> np.ndarray:
    order = np.lexsort((-values.imag, -values.real))
    return values[order]


def eigen_spectrum(a: np.ndarray) -> SpectrumResult:
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise NumericalFailure("drift matrix has non-finite entries")
    try:
        values = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver did not converge: {exc}") from exc
    values = _sort_slowest_first(np.asarray(values, dtype=complex))
    return SpectrumResult(eigenvalues=values, adr=float(-values.real.max()))


def asymptotic_decay_rate(spectrum: SpectrumResult) -> float:
    return float(-np.max(spectrum.eigenvalues.real))


@dataclass(frozen=True)
class SlowModeApprox:
    """Leading-order slow pair from ``A (kappa + lam) + B lam**2 = 0``."""

    coef_a: float
    coef_b: float
    eigenvalues: tuple[complex, complex]


def slow_mode_approx(params: ModelParams) -> SlowModeApprox:
    """Approximate slow eigenvalues for EP-tuned parameters below threshold.

    Valid only when ``delta`` equals :func:`ep_detuning`; that is left to
    the caller.  The approximation drops the cubic term of the
    characteristic polynomial, so the modulus of each eigenvalue is
    accurate to leading order while the real part is only correct up to
    an O(1) factor.
    """
    g_c = critical_coupling(params)
    if params.g > g_c:
        raise DomainError(
            f"slow_mode_approx needs g <= g_c; got g={params.g}, g_c={g_c}"
        )
    w, k, dk = params.omega, params.kappa, params.delta_kappa
    coef_a = 32 * g_c * w * dk * math.sqrt(k**2 - dk**2 + 2 * math.sqrt(k**2 * (k**2 - dk**2))) * (g_c - params.g)
    coef_b = 4 * ((2 * k**2 + w**2) * (k**2 - dk**2 + math.sqrt(k**2 * (k**2 - dk**2))) + k**2 * w**2)
    osc = 2 * math.sqrt(k * coef_b) * math.sqrt(coef_a)
    plus = complex(-coef_a, osc) / (2 * coef_b)
    minus = complex(-coef_a, -osc) / (2 * coef_b)
    return SlowModeApprox(coef_a=coef_a, coef_b=coef_b, eigenvalues=(plus, minus))


@dataclass(frozen=True)
class DefectReport:
    n_slow: int
    numerical_rank: int
    geometric_multiplicity: int
    defective: bool
    singular_values: np.ndarray
    slow_tol: float
    rank_tol: float


def ep_defect(a: np.ndarray, slow_tol: float | None = None, rank_tol: float = DEFAULT_RANK_TOL) -> DefectReport:
    """Compare the algebraic and geometric multiplicity of the zero eigenvalue.

    Parameters
    ----------
    a : ndarray
        Square real matrix.
    slow_tol : float, optional
        Eigenvalues with ``|lam| < slow_tol`` count as zero.  Defaults to
        ``1e-6`` times the spectral radius.  At an exceptional point a
        double zero splits by about ``sqrt(eps) * scale`` in floating
        point, far below this threshold.
    rank_tol : float
        Singular values ``<= rank_tol * sigma_max`` count as zero.

    Returns
    -------
    DefectReport
        ``defective`` is True when more eigenvalues are near zero than the
        kernel dimension can account for, i.e. a Jordan block.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    spectrum = eigen_spectrum(a)
    if slow_tol is None:
        scale = float(np.max(np.abs(spectrum.eigenvalues)))
        slow_tol = DEFAULT_SLOW_TOL_FACTOR * (scale if scale > 0 else 1.0)
    if not slow_tol > 0 or not rank_tol > 0:
        raise DomainError("slow_tol and rank_tol must be > 0")
    try:
        sv = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    n_slow = int(np.sum(np.abs(spectrum.eigenvalues) < slow_tol))
    rank = int(np.sum(sv > rank_tol * sv[0])) if sv[0] > 0 else 0
    geometric = n - rank
    return DefectReport(
        n_slow=n_slow,
        numerical_rank=rank,
        geometric_multiplicity=geometric,
        defective=n_slow > geometric,
        singular_values=sv,
        slow_tol=float(slow_tol),
        rank_tol=float(rank_tol),
    )
