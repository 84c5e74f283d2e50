"""Dense matrix kernels: prioritized QR, Cholesky variants, spectral tools."""

from .analysis import MMatrixWitness, diagonalization_number, is_m_matrix, spectral_radius
from .factor import (
    DEFAULT_RANK_TOL,
    KERNEL_BACKEND,
    PrioritizedDecomposition,
    cholesky_upper,
    qr_prioritized,
    reverse_cholesky_lower,
)

__all__ = [
    "DEFAULT_RANK_TOL",
    "KERNEL_BACKEND",
    "MMatrixWitness",
    "PrioritizedDecomposition",
    "cholesky_upper",
    "diagonalization_number",
    "is_m_matrix",
    "qr_prioritized",
    "reverse_cholesky_lower",
    "spectral_radius",
]
