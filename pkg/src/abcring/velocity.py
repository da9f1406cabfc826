"""Drift of the coarse walk when the two smallest blocks have fixed unequal sizes.

With blocks of sizes ``l`` (A) and ``m`` (B) and the third block very large,
the A-excursions still run through the ring of xi configurations, but the
large block turns the ring into a line.  Label the transient states by their
position ``-(m-2) .. (l-2)``; the three corners sit at ``-(m-2)``, ``0`` and
``l-2``, and absorption happens into four regions ``u_1, u_0, u_-1, u_-2``
(the segregated state reached is shifted by that amount).  ``v(l, m)`` is
``2/3`` times the mean shift summed over starting positions ``0 .. l-2``.

``velocity`` evaluates the closed-form pipeline, ``velocity_oracle`` solves the
same chain by elimination after folding the two infinite tails.  Both are
exact rationals.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .ideal_chain import sum_prefactor
from .linalg import solve_tridiagonal

TAIL_RETURN = Fraction(1, 3)
REGIONS = (1, 0, -1, -2)


def _side(l: int | None) -> tuple[Fraction, Fraction, Fraction]:
    """From the corner next to a side of ``l - 2`` interior states: probabilities of
    reaching the far corner, of coming back, and of being absorbed on the way.
    ``None`` stands for an infinite side."""
    if l is None:
        return Fraction(0), TAIL_RETURN, 1 - TAIL_RETURN
    third = Fraction(1, 3)
    den = Fraction(3) ** (l - 2) - third ** (l - 2)
    p = (3 - third) / den
    q = (Fraction(3) ** (l - 3) - third ** (l - 3)) / den
    return p, q, 1 - p - q


def _corner_pair(l: int | None, m: int | None) -> tuple[Fraction, Fraction]:
    """From a corner with a side of length ``l`` ahead and ``m`` behind: probability of
    reaching the far corner of the ``l`` side before absorption, and probability of
    being absorbed without doing so while the walk stays on the ``l`` side or at the corner."""
    p, q, r = _side(l)
    qm = _side(m)[1]
    step, absorb = Fraction(3, 14), Fraction(2, 7)
    den = 1 - step * (q + qm)
    return step * p / den, (absorb + step * r) / den


def _corner_to_infinity(m: int) -> Fraction:
    p, q, r = _side(None)
    qm = _side(m)[1]
    step, absorb = Fraction(3, 14), Fraction(2, 7)
    return (absorb + step * r) / (1 - step * (q + qm))


def velocity(l: int, m: int) -> Fraction:
    """``v(l, m)`` from the closed-form pipeline."""
    if l < 3 or m < 3:
        raise ValueError("block sizes must be at least 3")
    p_lm, q_lm = _corner_pair(l, m)
    p_ml, q_ml = _corner_pair(m, l)
    p_linf, _ = _corner_pair(l, None)
    p_minf, q_minf = _corner_pair(m, None)
    q_inf_l = _corner_to_infinity(l)
    q_inf_m = _corner_to_infinity(m)
    D = 1 - (p_lm * p_linf + p_ml * p_minf)
    # from the corner at 0 and the corner at l - 2, into u_1, u_-1 and u_-2
    p0_u1 = p_lm * q_inf_l / D
    pl_u1 = q_inf_l + p_linf * p0_u1
    p0_um1 = (q_ml + p_ml * q_minf) / D
    pl_um1 = p_linf * p0_um1
    p0_um2 = p_ml * q_inf_m / D
    pl_um2 = p_linf * p0_um2
    mean_shift = (p0_u1 + pl_u1) - (p0_um1 + pl_um1) - 2 * (p0_um2 + pl_um2)
    return Fraction(2, 3) * sum_prefactor(l) * mean_shift


def oracle_absorption(l: int, m: int) -> tuple[list[int], np.ndarray]:
    """Absorption matrix of the finite chain on ``-(m-2) .. (l-2)``.

    Rows follow the positions, columns the regions ``u_1, u_0, u_-1, u_-2``.
    Leaving the finite window means entering a half-line where each step goes
    left or right with probability 3/10 and absorbs with 2/5; the walk comes back
    with probability 1/3 (root of ``(3/10) h^2 - h + 3/10 = 0``) and otherwise
    ends in the outermost region.
    """
    if l < 3 or m < 3:
        raise ValueError("block sizes must be at least 3")
    lo, hi = -(m - 2), l - 2
    positions = list(range(lo, hi + 1))
    col = {u: c for c, u in enumerate(REGIONS)}

    def between(a: int) -> int:
        """Region of the gap between positions ``a`` and ``a + 1``."""
        if a + 1 <= lo:
            return -2
        if a >= hi:
            return 1
        return -1 if a + 1 <= 0 else 0

    lower, diag, upper = [], [], []
    rhs = np.full((len(positions), 4), Fraction(0), dtype=object)
    for idx, s in enumerate(positions):
        corner = s in (lo, 0, hi)
        step = Fraction(3, 14) if corner else Fraction(3, 10)
        absorb = Fraction(2, 7) if corner else Fraction(2, 5)
        d = Fraction(1)
        for t in (s - 1, s + 1):
            if lo <= t <= hi:
                continue
            d -= step * TAIL_RETURN
            rhs[idx, col[1 if t > hi else -2]] += step * (1 - TAIL_RETURN)
        lower.append(-step)
        upper.append(-step)
        diag.append(d)
        if corner:
            rhs[idx, col[between(s - 1)]] += absorb
            rhs[idx, col[between(s)]] += absorb
        else:
            rhs[idx, col[-1 if s < 0 else 0]] += absorb
    P = np.stack(list(solve_tridiagonal(lower, diag, upper, list(rhs))))
    return positions, P


def velocity_oracle(l: int, m: int) -> Fraction:
    """``v(l, m)`` by elimination on the folded chain (see ``oracle_absorption``)."""
    positions, P = oracle_absorption(l, m)
    lo = positions[0]
    shifts = np.array(REGIONS, dtype=object)
    total = sum((P[s - lo] * shifts).sum() for s in range(0, l - 1))
    return Fraction(2, 3) * total


def ballistic_velocity(l: int, m: int) -> Fraction:
    """Total drift when the two small blocks have sizes ``l`` and ``m``.

    ``v(l, m)`` only accounts for excursions of the smaller block; when the
    larger one is on the left the roles swap and the sign flips, and with equal
    sizes both kinds of excursion occur and cancel.
    """
    if l < m:
        return velocity(l, m)
    if l > m:
        return -velocity(m, l)
    return Fraction(0)
