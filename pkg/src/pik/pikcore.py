"""The prioritized IK solution class, reference law, and error dynamics.

With J = F_q R^{-1} = C J_hat from the prioritized QR, the solution class is

    u = R^{-1} J_hat^T C_D^T L r',      r' = r - f_t,

with r = dp/dt + K (p - f) the closed-loop reference, C_D the block
diagonal of the diagonal blocks of C, and L a constant block lower
triangular policy matrix (identity by default).  The induced task-error
dynamics are de_a/dt = -k_a A_aa e_a + b_a with A = C C_D^T L.

Decompositions are recomputed at every query; caching across
configurations is an optimization hook, not a semantic.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import ConfigError, ShapeError
from .matkit import DEFAULT_RANK_TOL, qr_prioritized


@dataclass(frozen=True)
class Gains:
    """Per-task feedback gains k_a > 0 (units 1/s)."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(k) for k in self.values))
        if not self.values or any(k <= 0 for k in self.values):
            raise ConfigError("all gains must be positive")

    def __len__(self):
        return len(self.values)

    def row_vector(self, task_dims):
        if len(task_dims) != len(self.values):
            raise ShapeError("gain count does not match task count")
        return np.repeat(np.asarray(self.values), np.asarray(task_dims))

    def matrix(self, task_dims):
        return np.diag(self.row_vector(task_dims))

    @property
    def norm(self):
        return max(self.values)


class LPolicy:
    """Constant block lower triangular policy matrix for the solution class.

    Only constant policies are supported; they make the Lipschitz and
    boundedness assumptions on L hold trivially.
    """

    def __init__(self, matrix, task_dims):
        M = np.asarray(matrix, dtype=float)
        task_dims = tuple(int(d) for d in task_dims)
        m = sum(task_dims)
        if M.shape != (m, m):
            raise ShapeError(f"L must be {m} x {m}")
        offs = np.concatenate([[0], np.cumsum(task_dims)])
        for a in range(len(task_dims)):
            for b in range(a + 1, len(task_dims)):
                if np.abs(M[offs[a]:offs[a + 1], offs[b]:offs[b + 1]]).max() > 0:
                    raise ConfigError("L must be block lower triangular")
        self.matrix = M
        self.task_dims = task_dims
        self._offsets = offs
        self.is_identity = bool(np.array_equal(M, np.eye(m)))

    @classmethod
    def identity(cls, task_dims):
        return cls(np.eye(sum(task_dims)), task_dims)

    def apply(self, v):
        return v if self.is_identity else self.matrix @ v

    def block(self, a, b):
        o = self._offsets
        return self.matrix[o[a]:o[a + 1], o[b]:o[b + 1]]

    @property
    def norm(self):
        return float(np.linalg.norm(self.matrix, 2))


@dataclass(frozen=True)
class SolverState:
    """Immutable solver configuration: preconditioner handle and rank
    tolerance.  ``preconditioner=None`` means R = I."""

    preconditioner: object = None
    rank_tol: float = DEFAULT_RANK_TOL


def _inv_upper(R):
    inv, info = lapack.dtrtri(R, lower=0)
    if info != 0:
        raise np.linalg.LinAlgError("triangular matrix is singular")
    return inv


@dataclass(frozen=True)
class PointFactorization:
    """Per-configuration factorization bundle (R = None when identity)."""

    F_q: np.ndarray
    R: np.ndarray | None
    R_inv: np.ndarray | None
    J: np.ndarray
    dec: object


def factor_at(state, model, t, q):
    F_q = model.jacobian(t, q)
    if state.preconditioner is None:
        J = F_q
        R = R_inv = None
    else:
        R = state.preconditioner.matrix(t, q)
        R_inv = _inv_upper(R)
        J = F_q @ R_inv
    dec = qr_prioritized(J, state.rank_tol, model.task_dims)
    return PointFactorization(F_q=F_q, R=R, R_inv=R_inv, J=J, dec=dec)


def reference(model, traj, gains, t, q):
    """Closed-loop reference r = dp/dt + K e and its shifted form r' = r - f_t."""
    p = traj.value(t)
    e = p - model.forward(t, q)
    r = traj.velocity(t) + gains.row_vector(model.task_dims) * e
    return r, r - model.f_t(t, q)


def _apply_C_D_T(dec, slices, y):
    out = y.copy()
    for a, sl in enumerate(slices):
        out[sl] = dec.block(a, a).T @ y[sl]
    return out


def solve(state, model, traj, gains, lpolicy, t, q):
    """Evaluate the PIK solution u at (t, q)."""
    pf = factor_at(state, model, t, q)
    _, r_prime = reference(model, traj, gains, t, q)
    y = _apply_C_D_T(pf.dec, model.task_slices, lpolicy.apply(r_prime))
    u = pf.dec.rows_raw().T @ y
    if pf.R_inv is not None:
        u = pf.R_inv @ u
    return u


@dataclass(frozen=True)
class ErrorDynamics:
    """Quantities of the task-error dynamics de_a/dt = -k_a A_aa e_a + b_a."""

    A: np.ndarray
    b: np.ndarray
    e: np.ndarray
    pdot_prime: np.ndarray
    u: np.ndarray
    edot: np.ndarray          # -k_a A_aa e_a + b_a, stacked
    edot_direct: np.ndarray   # dp/dt - f_t - F_q u
    task_slices: tuple

    def block(self, a, b):
        return self.A[self.task_slices[a], self.task_slices[b]]


def error_dynamics(state, model, traj, gains, lpolicy, t, q):
    pf = factor_at(state, model, t, q)
    slices = model.task_slices
    p = traj.value(t)
    e = p - model.forward(t, q)
    pdot_prime = traj.velocity(t) - model.f_t(t, q)
    k_row = gains.row_vector(model.task_dims)
    r_prime = pdot_prime + k_row * e

    A = pf.dec.C @ pf.dec.C_D.T @ lpolicy.matrix
    A_D = np.zeros_like(A)
    for sl in slices:
        A_D[sl, sl] = A[sl, sl]
    ke = k_row * e
    b = pdot_prime - A @ pdot_prime - A @ ke + A_D @ ke
    edot = -A_D @ ke + b

    y = _apply_C_D_T(pf.dec, slices, lpolicy.apply(r_prime))
    u = pf.dec.rows_raw().T @ y
    if pf.R_inv is not None:
        u = pf.R_inv @ u
    edot_direct = pdot_prime - pf.F_q @ u
    return ErrorDynamics(
        A=A, b=b, e=e, pdot_prime=pdot_prime, u=u,
        edot=edot, edot_direct=edot_direct, task_slices=slices,
    )


def residual(state, model, traj, gains, lpolicy, t, q, qdot):
    """Per-task residuals r'_a - J_a R qdot (J R equals F_q)."""
    _, r_prime = reference(model, traj, gains, t, q)
    res = r_prime - model.jacobian(t, q) @ qdot
    return [res[sl] for sl in model.task_slices]


@dataclass(frozen=True)
class PikSystem:
    """A model, trajectory, gain set, policy and solver state bundled into
    the closed-loop system dq/dt = u(t, q)."""

    model: object
    traj: object
    gains: Gains
    lpolicy: LPolicy
    state: SolverState

    def velocity(self, t, q):
        return solve(self.state, self.model, self.traj, self.gains, self.lpolicy, t, q)

    def task_errors(self, t, q):
        return self.traj.value(t) - self.model.forward(t, q)

    def phi(self, t, q):
        e = self.task_errors(t, q)
        return np.array([np.linalg.norm(e[sl]) for sl in self.model.task_slices])

    def error_dynamics(self, t, q):
        return error_dynamics(
            self.state, self.model, self.traj, self.gains, self.lpolicy, t, q
        )

    def residual(self, t, q, qdot):
        return residual(
            self.state, self.model, self.traj, self.gains, self.lpolicy, t, q, qdot
        )
