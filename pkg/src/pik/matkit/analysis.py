"""Spectral radius, M-matrix test, diagonalization number."""

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteError, ShapeError, ZMatrixViolation


def _square(A, name="matrix"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"{name} must be square")
    if not np.all(np.isfinite(A)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return A


def spectral_radius(A):
    """max |eigenvalue| via a dense eigensolve (matrices here are tiny)."""
    A = _square(A)
    if A.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvals(A)).max())


@dataclass(frozen=True)
class MMatrixWitness:
    """Decomposition X = s I - B checked by :func:`is_m_matrix`."""

    shift: float
    B: np.ndarray
    sr_B: float


def is_m_matrix(X):
    """Test whether the Z-matrix ``X`` is a nonsingular M-matrix.

    Writes X = s I - B with s the largest diagonal entry (so B >= 0) and
    checks sr(B) < s; the result does not depend on the choice of s.
    Returns ``(ok, witness)``.
    """
    X = _square(X, "X")
    off = X - np.diag(np.diag(X))
    if off.size and off.max() > 0:
        i, j = np.unravel_index(np.argmax(off), off.shape)
        raise ZMatrixViolation(
            f"positive off-diagonal entry X[{i},{j}] = {X[i, j]:.3e}"
        )
    s = float(np.diag(X).max()) if X.size else 0.0
    B = s * np.eye(X.shape[0]) - X
    sr_B = spectral_radius(B)
    return sr_B < s, MMatrixWitness(shift=s, B=B, sr_B=sr_B)


def diagonalization_number(M):
    """Squared diagonal mass over total squared mass, in [0, 1]."""
    M = _square(M, "M")
    total = float(np.sum(M * M))
    if total == 0.0:
        raise ValueError("diagonalization number of the zero matrix is undefined")
    return float(np.sum(np.diag(M) ** 2)) / total
