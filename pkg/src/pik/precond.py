"""Cholesky preconditioning of task Jacobians and its provable bounds.

Given a stacked Jacobian Jbar (m x n, m <= n) and damping w > 0, the
preconditioner is the upper Cholesky factor R of Jbar^T Jbar + w^2 I_n.
The preconditioned matrix J = Jbar R^{-1} has singular values
sigma_a = sbar_a / sqrt(sbar_a^2 + w^2), and its prioritized factor C obeys

    C = Cbar Ctilde^{-1},   Ctilde^T Ctilde = Cbar^T Cbar + w^2 I_m

with Ctilde the reverse Cholesky factor.  From the trailing blocks of Cbar
one gets two-sided bounds on the diagonal energy c_aa^2 and on the
diagonalization number dn(C); as w -> 0 on full-rank sets, C -> I.

Also here: the slice-wise triangular splitting maps and the analytic
derivatives of R^{-1}, C, J_hat in the joint variables.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import RankError, ShapeError
from .matkit import (
    DEFAULT_RANK_TOL,
    cholesky_upper,
    diagonalization_number,
    qr_prioritized,
    reverse_cholesky_lower,
)
from .matkit.tensor import lmul, slice_transpose


def build_matrix(F_q, w):
    """Upper Cholesky factor R of F_q^T F_q + w^2 I_n."""
    F_q = np.asarray(F_q, dtype=float)
    if w <= 0:
        raise ValueError("damping w must be positive")
    n = F_q.shape[1]
    return cholesky_upper(F_q.T @ F_q + w * w * np.eye(n))


class Preconditioner:
    """Damped Cholesky preconditioner, either frozen at one Jacobian value
    or bound to a kinematic model for pointwise use."""

    def __init__(self, w, model=None, F_q=None):
        if w <= 0:
            raise ValueError("damping w must be positive")
        if (model is None) == (F_q is None):
            raise ValueError("give exactly one of model or F_q")
        self.w = float(w)
        self.model = model
        if F_q is not None:
            self._R = build_matrix(F_q, w)
            self._R_inv = solve_triangular(self._R, np.eye(self._R.shape[0]))
        else:
            self._R = self._R_inv = None

    def matrix(self, t=0.0, q=None):
        if self._R is not None:
            return self._R
        return build_matrix(self.model.jacobian(t, q), self.w)

    def inverse(self, t=0.0, q=None):
        if self._R_inv is not None:
            return self._R_inv
        R = self.matrix(t, q)
        return solve_triangular(R, np.eye(R.shape[0]))


def build(F_q_value, w):
    """Single-point preconditioner from a Jacobian value."""
    return Preconditioner(w, F_q=F_q_value)


def bind(model, w):
    """Preconditioner evaluating R(t, q) through the model."""
    return Preconditioner(w, model=model)


def _trailing_sv(Cbar, a):
    block = Cbar[a + 1:, a + 1:]
    if block.size == 0:
        return 0.0, 0.0
    sv = np.linalg.svd(block, compute_uv=False)
    return float(sv[0]), float(sv[-1])


@dataclass(frozen=True)
class PrecondBounds:
    """Per-index diagonal bounds and diagonalization-number bounds."""

    w: float
    cbar_diag: np.ndarray
    c_diag: np.ndarray
    nu_sq: np.ndarray
    nu_lo_sq: np.ndarray
    nu_hi_sq: np.ndarray
    alpha_sq: np.ndarray
    beta_sq: np.ndarray
    sigma_bar: np.ndarray
    rho_sq: float
    dn_C: float
    dn_Cbar: float
    C: np.ndarray
    Cbar: np.ndarray
    Ctilde: np.ndarray

    @property
    def dn_lower(self):
        return float(self.alpha_sq.sum() / self.rho_sq)

    @property
    def dn_upper(self):
        return float(self.beta_sq.sum() / self.rho_sq)

    def check_sandwich(self, slack=1e-9):
        c_sq = self.c_diag**2
        worst = max(
            float((self.alpha_sq - c_sq).max()),
            float((c_sq - self.beta_sq).max()),
            self.dn_lower - self.dn_C,
            self.dn_C - self.dn_upper,
        )
        if worst > slack:
            raise ArithmeticError(
                f"diagonal-energy sandwich violated by {worst:.3e}"
            )
        return worst


def _algebraic_C(Cbar, w):
    m = Cbar.shape[0]
    Ctilde = reverse_cholesky_lower(Cbar.T @ Cbar + w * w * np.eye(m))
    # C = Cbar Ctilde^{-1} via one triangular solve
    C = solve_triangular(Ctilde.T, Cbar.T, lower=False).T
    return C, Ctilde


def theorem3_bounds(Jbar, w, rank_tol=DEFAULT_RANK_TOL, slack=1e-9):
    """Bound report for the preconditioning of ``Jbar`` by damping ``w``.

    Raises ArithmeticError if the computed quantities violate the
    guaranteed sandwich by more than ``slack`` (they never should).
    """
    Jbar = np.asarray(Jbar, dtype=float)
    dec = qr_prioritized(Jbar, rank_tol)
    Cbar = dec.C
    C, Ctilde = _algebraic_C(Cbar, w)
    m = Cbar.shape[0]
    cbar_diag = np.diag(Cbar).copy()
    c_diag = np.diag(C).copy()
    nu_sq = np.empty(m)
    nu_lo = np.empty(m)
    nu_hi = np.empty(m)
    for a in range(m):
        dbar = Cbar[a + 1:, a]
        dtil = Ctilde[a + 1:, a]
        nu_sq[a] = float(dbar @ dbar - dtil @ dtil)
        smax, smin = _trailing_sv(Cbar, a)
        dsq = float(dbar @ dbar)
        nu_lo[a] = w * w * dsq / (smax * smax + w * w)
        nu_hi[a] = w * w * dsq / (smin * smin + w * w)
    denom_hi = cbar_diag**2 + w * w + nu_hi
    denom_lo = cbar_diag**2 + w * w + nu_lo
    alpha_sq = cbar_diag**2 / denom_hi
    beta_sq = cbar_diag**2 / denom_lo
    sigma_bar = np.linalg.svd(Jbar, compute_uv=False)
    rho_sq = float(np.sum(sigma_bar**2 / (sigma_bar**2 + w * w)))
    bounds = PrecondBounds(
        w=float(w),
        cbar_diag=cbar_diag,
        c_diag=c_diag,
        nu_sq=nu_sq,
        nu_lo_sq=nu_lo,
        nu_hi_sq=nu_hi,
        alpha_sq=alpha_sq,
        beta_sq=beta_sq,
        sigma_bar=sigma_bar,
        rho_sq=rho_sq,
        dn_C=diagonalization_number(C),
        dn_Cbar=diagonalization_number(Cbar),
        C=C,
        Cbar=Cbar,
        Ctilde=Ctilde,
    )
    bounds.check_sandwich(slack)
    return bounds


def check_C_identity(Jbar, w, rank_tol=DEFAULT_RANK_TOL):
    """Max deviation between the QR factor of Jbar R^{-1} and Cbar Ctilde^{-1}."""
    Jbar = np.asarray(Jbar, dtype=float)
    R = build_matrix(Jbar, w)
    J = solve_triangular(R, Jbar.T, trans="T", lower=False).T
    C_qr = qr_prioritized(J, rank_tol).C
    Cbar = qr_prioritized(Jbar, rank_tol).C
    C_alg, _ = _algebraic_C(Cbar, w)
    return float(np.abs(C_qr - C_alg).max())


@dataclass(frozen=True)
class Corollary1Report:
    """Strict norm bounds on the preconditioned factor C over every
    contiguous block; all margins must be positive."""

    max_abs_entry: float
    spectral_norm: float
    one_norm_margin: float
    inf_norm_margin: float
    frobenius_sq_margin: float

    @property
    def all_strict(self):
        return bool(
            self.max_abs_entry < 1.0
            and self.spectral_norm < 1.0
            and self.one_norm_margin > 0.0
            and self.inf_norm_margin > 0.0
            and self.frobenius_sq_margin > 0.0
        )


def _segment_margin(absC):
    """min over row ranges [a, a2] of (a2 - a + 1) - max_j sum |c_ij|."""
    m = absC.shape[0]
    cum = np.vstack([np.zeros(absC.shape[1]), np.cumsum(absC, axis=0)])
    margin = np.inf
    for a in range(m):
        for a2 in range(a, m):
            seg = cum[a2 + 1] - cum[a]
            margin = min(margin, (a2 - a + 1) - float(seg.max()))
    return margin


def _frobenius_margin(C):
    """min over all blocks of min(height, width) - sum of squares."""
    m, mc = C.shape
    sq = C * C
    margin = np.inf
    for a in range(m):
        for a2 in range(a, m):
            h = a2 - a + 1
            colseg = sq[a:a2 + 1].sum(axis=0)
            cs = np.concatenate([[0.0], np.cumsum(colseg)])
            for width in range(1, mc + 1):
                maxseg = float((cs[width:] - cs[:-width]).max())
                margin = min(margin, min(h, width) - maxseg)
    return margin


def corollary1_checks(C):
    """Evaluate the five strict norm bounds for a preconditioned C.

    The 2-norm case is settled by the full matrix: every block's 2-norm is
    at most the full norm and the full matrix is itself a block.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ShapeError("C must be square")
    absC = np.abs(C)
    return Corollary1Report(
        max_abs_entry=float(absC.max()),
        spectral_norm=float(np.linalg.norm(C, 2)),
        one_norm_margin=_segment_margin(absC),
        inf_norm_margin=_segment_margin(absC.T),
        frobenius_sq_margin=_frobenius_margin(C),
    )


def phi_upper(T):
    """Slice-wise upper split: strict upper kept, diagonal halved."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 3 or T.shape[0] != T.shape[1]:
        raise ShapeError("expected a tensor with square slices")
    d = T.shape[0]
    mask = np.triu(np.ones((d, d)), 1) + 0.5 * np.eye(d)
    return T * mask[:, :, None]


def phi_lower(T):
    """Slice-wise lower split: strict lower kept, diagonal halved."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 3 or T.shape[0] != T.shape[1]:
        raise ShapeError("expected a tensor with square slices")
    d = T.shape[0]
    mask = np.tril(np.ones((d, d)), -1) + 0.5 * np.eye(d)
    return T * mask[:, :, None]


def phi_maps(T):
    return phi_upper(T), phi_lower(T)


@dataclass(frozen=True)
class FactorDerivatives:
    """Joint derivatives of the preconditioned factorization at one point.

    Tensors hold the partial in q_k at third index k.
    """

    R: np.ndarray
    R_inv: np.ndarray
    C: np.ndarray
    J_hat: np.ndarray
    dR_inv: np.ndarray
    dC: np.ndarray
    dJ_hat: np.ndarray


def analytic_derivatives(model, w, t, q, rank_tol=DEFAULT_RANK_TOL):
    """D_q R^{-1}, D_q C, D_q J_hat for the preconditioned pipeline.

    Requires full rank at q (C invertible).
    """
    F_q = model.jacobian(t, q)
    DF = model.jacobian_derivative(t, q)
    R = build_matrix(F_q, w)
    R_inv = solve_triangular(R, np.eye(R.shape[0]))
    J = F_q @ R_inv
    dec = qr_prioritized(J, rank_tol)
    if dec.dependent.any():
        raise RankError("factor derivatives need full row rank at q")
    C = dec.C
    J_hat = dec.J_hat
    C_inv = solve_triangular(C, np.eye(C.shape[0]), lower=True)

    A = np.einsum("ab,bck,cd->adk", R_inv.T, DF.transpose(1, 0, 2), J)
    S = phi_upper(A + slice_transpose(A))
    dR_inv = -lmul(R_inv, S)

    B = np.einsum("ab,bck,cd,de->aek", C_inv - C.T, DF, R_inv, J_hat.T)
    G = phi_lower(B + slice_transpose(B))
    dC = lmul(C, G)

    dJ_hat = (
        np.einsum("ab,bck,cd->adk", C_inv, DF, R_inv)
        - np.einsum("ab,bck->ack", J_hat, S)
        - np.einsum("abk,bc->ack", G, J_hat)
    )
    return FactorDerivatives(
        R=R, R_inv=R_inv, C=C, J_hat=J_hat, dR_inv=dR_inv, dC=dC, dJ_hat=dJ_hat
    )


def cbar_derivative(model, t, q, rank_tol=DEFAULT_RANK_TOL):
    """D_q Cbar for the unpreconditioned factor F_q = Cbar Jbar_hat."""
    F_q = model.jacobian(t, q)
    DF = model.jacobian_derivative(t, q)
    dec = qr_prioritized(F_q, rank_tol)
    if dec.dependent.any():
        raise RankError("Cbar derivative needs full row rank at q")
    Cbar = dec.C
    Cb_inv = solve_triangular(Cbar, np.eye(Cbar.shape[0]), lower=True)
    half = np.einsum("abk,cb->ack", DF, F_q)  # DF_k @ F_q^T
    dGram = half + slice_transpose(half)
    M = np.einsum("ab,bck,dc->adk", Cb_inv, dGram, Cb_inv)
    return lmul(Cbar, phi_lower(M))
