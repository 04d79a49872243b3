"""Small dense kernels: matrix exponential and complete-pivoting solve."""

from __future__ import annotations

import math

import numpy as np

# Pade [13/13] numerator coefficients b_0..b_13 (Higham 2005).
_B13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 5.371920351148152


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant.

    The matrix is scaled by ``2**-s`` until its 1-norm is below ``theta_13``,
    where the Pade error is under unit roundoff, then squared back ``s``
    times.
    """
    a = np.asarray(a)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise ValueError("expm expects a square matrix")
    norm1 = np.linalg.norm(a, 1)
    s = 0
    if norm1 > _THETA13:
        s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
    a = a / 2.0**s

    b = _B13
    eye = np.eye(n, dtype=a.dtype)
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye
    )
    r = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        r = r @ r
    return r


def solve_full_pivot(m: np.ndarray, rhs: np.ndarray, rtol: float = 64 * np.finfo(float).eps):
    """Gaussian elimination with complete pivoting.

    Returns ``(x, ok)``; ``ok`` is False when a pivot falls below
    ``rtol`` times the first (largest) pivot, i.e. ``m`` is numerically
    rank-deficient.  ``x`` is None in that case.
    """
    lu = np.array(m, dtype=np.result_type(m, rhs, float), copy=True)
    b = np.array(rhs, dtype=lu.dtype, copy=True)
    n = lu.shape[0]
    col_perm = np.arange(n)
    first_pivot = None
    for k in range(n):
        sub = np.abs(lu[k:, k:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        i += k
        j += k
        pivot_mag = sub[i - k, j - k]
        if first_pivot is None:
            first_pivot = pivot_mag
        if first_pivot == 0 or pivot_mag <= rtol * first_pivot:
            return None, False
        if i != k:
            lu[[k, i], :] = lu[[i, k], :]
            b[[k, i]] = b[[i, k]]
        if j != k:
            lu[:, [k, j]] = lu[:, [j, k]]
            col_perm[[k, j]] = col_perm[[j, k]]
        factors = lu[k + 1:, k] / lu[k, k]
        lu[k + 1:, k:] -= np.outer(factors, lu[k, k:])
        b[k + 1:] -= np.multiply.outer(factors, b[k]) if b.ndim > 1 else factors * b[k]
    y = np.empty_like(b)
    for k in range(n - 1, -1, -1):
        y[k] = (b[k] - lu[k, k + 1:] @ y[k + 1:]) / lu[k, k]
    x = np.empty_like(y)
    x[col_perm] = y
    return x, True
