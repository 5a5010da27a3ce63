"""Small dense solves for the normal equations."""

from __future__ import annotations

import sys

from erode.errors import SingularSystemError

EPS = sys.float_info.epsilon


def gauss_solve(a, b):
    """Solve ``a @ x = b`` by Gaussian elimination with partial pivoting.

    ``a`` is a square list of rows, ``b`` a list; neither is modified.
    Returns ``(x, condition)`` where ``condition`` is the ratio of the largest
    to the smallest pivot magnitude, a cheap lower bound on cond(a).
    """
    n = len(a)
    m = [list(map(float, row)) + [float(rhs)] for row, rhs in zip(a, b)]
    if any(len(row) != n + 1 for row in m) or len(b) != n:
        raise ValueError("gauss_solve needs a square system")
    scale = max((abs(v) for row in m for v in row[:n]), default=0.0)
    if scale == 0.0:
        raise SingularSystemError("zero matrix", float("inf"))

    pivots = []
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(m[i][k]))
        if p != k:
            m[k], m[p] = m[p], m[k]
        piv = m[k][k]
        pivots.append(abs(piv))
        if abs(piv) <= n * EPS * scale:
            big = max(pivots)
            cond = big / abs(piv) if piv else float("inf")
            raise SingularSystemError("normal equations are numerically singular", cond)
        for i in range(k + 1, n):
            f = m[i][k] / piv
            if f:
                row_i, row_k = m[i], m[k]
                for j in range(k, n + 1):
                    row_i[j] -= f * row_k[j]

    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        s = m[i][n] - sum(m[i][j] * x[j] for j in range(i + 1, n))
        x[i] = s / m[i][i]
    return x, max(pivots) / min(pivots)
