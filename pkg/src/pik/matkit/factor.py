"""Factorizations with the priority-ordered conventions used everywhere else.

The central object is the prioritized QR of a stacked task matrix ``J``
(m x n, m <= n): ``J = C @ J_hat`` with ``C`` lower triangular with
nonnegative diagonals and ``J_hat`` having orthonormal rows.  A row that is
linearly dependent on the rows above it gets a zero diagonal, its entire
column of ``C`` is zeroed, and its ``J_hat`` row is completed from the
orthogonal complement of the independent rows.  ``J_hat_e`` extends
``J_hat`` to a full orthonormal basis of R^n.

The row sweep itself (modified Gram-Schmidt with one reorthogonalization
pass) is the hot kernel of the whole package: it runs once per integration
step and once per sampled configuration during certification.  A compiled
Cython implementation is used when available; set ``PIK_PURE_PYTHON=1`` to
force the numpy fallback.
"""

import functools
import os

import numpy as np

from ..errors import DefinitenessError, NonFiniteError, ShapeError

if os.environ.get("PIK_PURE_PYTHON") == "1":
    from . import _mgs_py as _kernel
else:
    try:
        from . import _mgs as _kernel
    except ImportError:
        from . import _mgs_py as _kernel

KERNEL_BACKEND = "compiled" if _kernel.COMPILED else "python"

DEFAULT_RANK_TOL = 1e-9


def _require_finite(A, name):
    if not np.all(np.isfinite(A)):
        raise NonFiniteError(f"{name} contains NaN or Inf entries")


class PrioritizedDecomposition:
    """Result of :func:`qr_prioritized`.

    Attributes
    ----------
    C : (m, m) lower triangular, nonnegative diagonals, zero columns at
        dependent rows.
    J_hat : (m, n) orthonormal rows (dependent rows completed from the
        orthogonal complement; built lazily).
    J_hat_e : (n, n) orthogonal extension whose top m rows equal ``J_hat``
        (built lazily).
    dependent : (m,) bool mask of rows declared linearly dependent.
    task_dims : block sizes (m_1, ..., m_l) used for block views.
    """

    def __init__(self, C, rows, dependent, task_dims, rank_tol):
        self.C = C
        self._rows = rows  # dependent rows are exact zeros
        self.dependent = dependent
        self.task_dims = tuple(int(d) for d in task_dims)
        self.rank_tol = rank_tol
        m, n = rows.shape
        self.m = m
        self.n = n
        if sum(self.task_dims) != m:
            raise ShapeError(f"task_dims {self.task_dims} do not sum to m={m}")
        offs = np.concatenate([[0], np.cumsum(self.task_dims)])
        self._offsets = offs

    @property
    def rank(self):
        return self.m - int(self.dependent.sum())

    @functools.cached_property
    def J_hat(self):
        if not self.dependent.any():
            return self._rows
        J_hat = self._rows.copy()
        comp = self._complement
        J_hat[self.dependent] = comp[: int(self.dependent.sum())]
        return J_hat

    @functools.cached_property
    def J_hat_e(self):
        extra = self._complement[int(self.dependent.sum()):]
        return np.vstack([self.J_hat, extra])

    @functools.cached_property
    def _complement(self):
        """Orthonormal basis of the complement of the accepted rows.

        The completion convention (Householder-based, deterministic for a
        fixed build) is a documented choice; every consumer only relies on
        orthonormality.
        """
        acc = self._rows[~self.dependent]
        if acc.shape[0] == 0:
            return np.eye(self.n)
        full = np.linalg.qr(acc.T, mode="complete")[0]
        return full[:, acc.shape[0]:].T

    def block(self, a, b):
        """Block C_ab of ``C`` (0-based task indices)."""
        o = self._offsets
        return self.C[o[a]:o[a + 1], o[b]:o[b + 1]]

    @functools.cached_property
    def C_D(self):
        """Block diagonal of the diagonal blocks C_aa."""
        out = np.zeros_like(self.C)
        o = self._offsets
        for a in range(len(self.task_dims)):
            out[o[a]:o[a + 1], o[a]:o[a + 1]] = self.block(a, a)
        return out

    def rows_raw(self):
        """Accepted rows with dependent slots zeroed (hot-path view)."""
        return self._rows


def qr_prioritized(J, rank_tol=DEFAULT_RANK_TOL, task_dims=None):
    """Prioritized QR ``J = C @ J_hat`` (see module docstring).

    Row ``a`` is declared dependent when its Gram-Schmidt residual norm is
    at most ``rank_tol`` times the row norm.
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 2:
        raise ShapeError("J must be a 2-d array")
    m, n = J.shape
    if m > n:
        raise ShapeError(f"J must have m <= n, got {m} x {n}")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    _require_finite(J, "J")
    C, rows, dep = _kernel.factorize(np.ascontiguousarray(J), rank_tol)
    if task_dims is None:
        task_dims = (m,) if m else ()
    return PrioritizedDecomposition(C, rows, dep, task_dims, rank_tol)


def _check_spd_input(W, sym_tol=1e-12):
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ShapeError("expected a square matrix")
    _require_finite(W, "W")
    scale = max(1.0, np.abs(W).max())
    if np.abs(W - W.T).max() > sym_tol * scale:
        raise DefinitenessError("matrix is not symmetric")
    return 0.5 * (W + W.T)


def cholesky_upper(W):
    """Upper-triangular R with positive diagonals and R^T R = W."""
    Ws = _check_spd_input(W)
    try:
        L = np.linalg.cholesky(Ws)
    except np.linalg.LinAlgError as exc:
        raise DefinitenessError("matrix is not positive definite") from exc
    return np.ascontiguousarray(L.T)


def reverse_cholesky_lower(W):
    """Lower-triangular C with positive diagonals and C^T C = W.

    Computed by index reversal: factor P W P with P the reversal
    permutation, then map the factor back.
    """
    Ws = _check_spd_input(W)
    try:
        L = np.linalg.cholesky(Ws[::-1, ::-1])
    except np.linalg.LinAlgError as exc:
        raise DefinitenessError("matrix is not positive definite") from exc
    return np.ascontiguousarray(L.T[::-1, ::-1])
