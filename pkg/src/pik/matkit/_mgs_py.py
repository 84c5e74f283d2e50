"""Pure-numpy fallback for the prioritized Gram-Schmidt kernel.

Same contract as the compiled ``pik.matkit._mgs`` module; kept in lockstep
with it (modified Gram-Schmidt, one unconditional reorthogonalization pass,
zero-column convention for dependent rows).
"""

import numpy as np

COMPILED = False


def factorize(J, rank_tol):
    """Row-wise prioritized MGS of ``J`` (m x n, m <= n).

    Returns ``(C, Q, dep)`` with ``J = C @ Q`` where ``C`` is lower
    triangular with nonnegative diagonals, the accepted rows of ``Q`` are
    orthonormal, dependent rows of ``Q`` are left zero, and ``dep`` marks
    them.  Column ``a`` of ``C`` is entirely zero when ``dep[a]`` is set.
    """
    m, n = J.shape
    C = np.zeros((m, m))
    Q = np.zeros((m, n))
    dep = np.zeros(m, dtype=bool)
    accepted = []
    for a in range(m):
        v = J[a].copy()
        norm0 = np.linalg.norm(v)
        for _ in range(2):
            for i in accepted:
                c = Q[i] @ v
                C[a, i] += c
                v -= c * Q[i]
        r = np.linalg.norm(v)
        if norm0 == 0.0 or r <= rank_tol * norm0:
            dep[a] = True
        else:
            C[a, a] = r
            Q[a] = v / r
            accepted.append(a)
    return C, Q, dep
