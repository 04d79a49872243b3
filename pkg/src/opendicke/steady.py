"""Steady-state Gaussian fluctuations: covariance, observables and noise spectrum.

Quadratures use the convention where the vacuum has variance 1/2, so the
three-mode vacuum covariance is ``0.5 * I``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._linalg import expm, solve_full_pivot
from .errors import DomainError, NotHurwitz, SingularResolvent, TruncationWarning

__all__ = [
    "CovarianceMatrix",
    "NoiseSpectrum",
    "QUADRATURE_LABELS",
    "STABILITY_TOL",
    "solve_lyapunov",
    "lyapunov_residual",
    "covariance_integral_oracle",
    "number_fluctuations",
    "purity",
    "quadrature_moments",
    "noise_spectrum",
]

STABILITY_TOL = 1e-12

# label -> (row, col) in the (dx1, dp1, dx2, dp2, xb, pb) ordering
QUADRATURE_LABELS = {
    "xx1": (0, 0),
    "pp1": (1, 1),
    "xp1": (0, 1),
    "xx2": (2, 2),
    "pp2": (3, 3),
    "xp2": (2, 3),
    "xxb": (4, 4),
    "ppb": (5, 5),
    "xpb": (4, 5),
}


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetrized second moments over ``(dx1, dp1, dx2, dp2, xb, pb)``."""

    v: np.ndarray

    def __post_init__(self):
        v = np.array(self.v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    def is_symmetric(self, atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.v, self.v.T, rtol=0, atol=atol))

    def is_psd(self, atol: float = 1e-10) -> bool:
        return bool(np.linalg.eigvalsh(self.v).min() >= -atol)


def _max_real_eig(a: np.ndarray) -> float:
    return float(np.linalg.eigvals(a).real.max())


def _require_hurwitz(a: np.ndarray, tol: float) -> float:
    max_re = _max_real_eig(a)
    if not max_re < -tol:
        raise NotHurwitz(max_re, tol)
    return max_re


def lyapunov_residual(a, v, d) -> float:
    """Frobenius norm of ``A V + V A^T + D``."""
    a, v, d = (np.asarray(x, dtype=float) for x in (a, v, d))
    return float(np.linalg.norm(a @ v + v @ a.T + d))


def solve_lyapunov(a, d, stability_tol: float = STABILITY_TOL) -> CovarianceMatrix:
    """Solve ``A V + V A^T + D = 0`` for the steady-state covariance.

    The equation is vectorized with the Kronecker identity
    ``vec(A V + V A^T) = (I kron A + A kron I) vec(V)`` (column-major vec)
    and solved as one dense system, followed by one step of iterative
    refinement and symmetrization.

    Raises
    ------
    NotHurwitz
        If ``max Re(lambda(A)) >= -stability_tol``.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    _require_hurwitz(a, stability_tol)
    n = a.shape[0]
    eye = np.eye(n)
    op = np.kron(eye, a) + np.kron(a, eye)
    rhs = -d.reshape(-1, order="F")
    x = np.linalg.solve(op, rhs)
    x += np.linalg.solve(op, rhs - op @ x)
    v = x.reshape(n, n, order="F")
    return CovarianceMatrix(0.5 * (v + v.T))


def covariance_integral_oracle(
    a,
    d,
    horizon: float | None = None,
    steps: int | None = None,
    nodes: int = 8,
    rtol: float = 1e-9,
    stability_tol: float = STABILITY_TOL,
) -> CovarianceMatrix:
    """Evaluate ``V = int_0^T exp(A u) D exp(A^T u) du`` by quadrature.

    ``[0, T]`` is cut into ``steps`` equal panels, each integrated with
    ``nodes``-point Gauss-Legendre.  Because the panel starts are
    ``t_j = j h`` the sum factorizes as
    ``sum_k w_k E_k (sum_j P_j D P_j^T) E_k^T`` with ``E_k = exp(A tau_k)``
    and ``P_j = exp(A h)**j``, so only ``nodes + 1`` exponentials are
    needed.

    A :class:`TruncationWarning` is issued when the tail estimate
    ``|exp(A T) D exp(A^T T)| / (2 * adr)`` exceeds ``rtol * |V_T|``.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    max_re = _require_hurwitz(a, stability_tol)
    decay = -max_re
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    if horizon is None:
        horizon = 40.0 / decay
    if horizon < 0:
        raise DomainError(f"horizon must be >= 0, got {horizon}")
    if steps is None:
        steps = max(64, int(math.ceil(2.0 * horizon * radius)))
    if steps < 1:
        raise DomainError(f"steps must be >= 1, got {steps}")

    n = a.shape[0]
    if horizon == 0:
        total = np.zeros((n, n))
        tail = float(np.linalg.norm(d)) / (2 * decay)
    else:
        h = horizon / steps
        x, w = np.polynomial.legendre.leggauss(nodes)
        taus = 0.5 * h * (x + 1.0)
        weights = 0.5 * h * w
        step = expm(a * h)
        gram = np.zeros((n, n))
        p = np.eye(n)
        for _ in range(steps):
            gram += p @ d @ p.T
            p = p @ step
        total = np.zeros((n, n))
        for tau, wk in zip(taus, weights):
            e = expm(a * tau)
            total += wk * (e @ gram @ e.T)
        # p is now exp(A T)
        tail = float(np.linalg.norm(p @ d @ p.T)) / (2 * decay)

    scale = float(np.linalg.norm(total))
    if tail > rtol * scale:
        warnings.warn(
            f"covariance integral truncated at T={horizon}: tail estimate {tail:.3e} "
            f"vs |V|={scale:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    return CovarianceMatrix(0.5 * (total + total.T))


def number_fluctuations(cov: CovarianceMatrix) -> tuple[float, float, float]:
    """Excess occupations ``(dn1, dn2, dnb)`` over vacuum."""
    v = cov.v
    return tuple(float(0.5 * (v[i, i] + v[i + 1, i + 1] - 1.0)) for i in (0, 2, 4))


def purity(cov: CovarianceMatrix) -> float:
    # Gaussian state of 3 modes with vacuum variance 1/2: mu = 1 / (2**3 sqrt(det V))
    sign, logdet = np.linalg.slogdet(cov.v)
    if sign <= 0:
        raise DomainError("covariance matrix has non-positive determinant")
    n_modes = cov.v.shape[0] // 2
    return float(math.exp(-n_modes * math.log(2.0) - 0.5 * logdet))


def quadrature_moments(cov: CovarianceMatrix) -> dict[str, float]:
    return {label: float(cov.v[i, j]) for label, (i, j) in QUADRATURE_LABELS.items()}


@dataclass(frozen=True)
class NoiseSpectrum:
    omegas: np.ndarray
    matrices: np.ndarray

    def entry(self, i: int, j: int) -> np.ndarray:
        return self.matrices[:, i, j]


def noise_spectrum(a, d, omegas) -> NoiseSpectrum:
    """Symmetrized noise spectrum ``S(w) = R(w) D R(w)^H``, ``R(w) = (i w - A)^-1``.

    Each resolvent is obtained by complete-pivoting elimination; a
    numerically singular ``i w - A`` raises :class:`SingularResolvent`
    naming the frequency.  Unlike the Lyapunov solve this does not need
    ``A`` to be Hurwitz, so it can be evaluated exactly at ``g_c``.
    """
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    n = a.shape[0]
    eye = np.eye(n)
    out = np.empty((omegas.size, n, n), dtype=complex)
    for idx, w in enumerate(omegas):
        r, ok = solve_full_pivot(1j * w * eye - a, eye.astype(complex))
        if not ok:
            raise SingularResolvent(float(w))
        s = r @ d @ r.conj().T
        out[idx] = 0.5 * (s + s.conj().T)
    return NoiseSpectrum(omegas=omegas, matrices=out)
