"""Direct elimination for cyclic tridiagonal systems.

Works on ``float`` or ``fractions.Fraction`` coefficients alike: the
right-hand side is a 1-D or 2-D numpy array (``dtype=object`` for fractions) and only
``+ - * /`` are used, so the rational path stays exact.
"""
from __future__ import annotations

import numpy as np


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm.  ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = len(diag)
    cp = [None] * n
    dp = [None] * n
    cp[0] = upper[0] / diag[0] if n > 1 else None
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        den = diag[i] - lower[i] * cp[i - 1]
        if den == 0:
            raise ZeroDivisionError("singular tridiagonal system")
        if i < n - 1:
            cp[i] = upper[i] / den
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / den
    out = [None] * n
    out[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return np.array(out)


def solve_cyclic_tridiagonal(lower, diag, upper, rhs):
    """Solve ``lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`` with indices mod n.

    The first ``n - 1`` unknowns are written as ``y + x[n-1] z`` from two
    tridiagonal solves; the last equation then fixes ``x[n-1]``.
    """
    n = len(diag)
    rhs = np.asarray(rhs)
    if n < 3:
        raise ValueError("cyclic system needs at least three unknowns")
    m = n - 1
    zero = diag[0] * 0
    coupling = np.array([zero] * m, dtype=rhs.dtype if rhs.dtype == object else float)
    coupling[0] = -lower[0]
    coupling[m - 1] = coupling[m - 1] - upper[m - 1]
    both = np.concatenate([rhs[:m].reshape(m, -1), coupling.reshape(m, 1)], axis=1)
    sol = solve_tridiagonal(lower[:m], diag[:m], upper[:m], list(both))
    sol = np.stack(list(sol))
    y, z = sol[:, :-1], sol[:, -1]
    den = diag[m] + lower[m] * z[m - 1] + upper[m] * z[0]
    if den == 0:
        raise ZeroDivisionError("singular cyclic system")
    last = (np.asarray(rhs[m]).reshape(-1) - lower[m] * y[m - 1] - upper[m] * y[0]) / den
    x = y + np.outer(z, last)
    return np.vstack([x, last.reshape(1, -1)]).reshape((n,) + rhs.shape[1:])
