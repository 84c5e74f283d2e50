"""Slice-wise operations on 3-d arrays.

A tensor ``T`` of shape (d1, d2, d3) is read as d3 matrices of shape
(d1, d2); every matrix product below contracts each slice independently.
The norm is the one used throughout: sqrt of the sum over slices of the
squared matrix 2-norms.
"""

import numpy as np


def lmul(M, T):
    """Slice-wise M @ T_k."""
    return np.einsum("ab,bck->ack", M, T)


def rmul(T, M):
    """Slice-wise T_k @ M."""
    return np.einsum("abk,bc->ack", T, M)


def slice_transpose(T):
    return T.transpose(1, 0, 2)


def tensor_norm(T):
    """sqrt(sum_k ||T_k||_2^2)."""
    if T.size == 0:
        return 0.0
    sq = 0.0
    for k in range(T.shape[2]):
        sq += np.linalg.norm(T[:, :, k], 2) ** 2
    return float(np.sqrt(sq))
