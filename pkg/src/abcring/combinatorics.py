"""A binomial identity used for the meeting-position weights, with its counting oracle.

All arithmetic is on Python integers and ``Fraction``; nothing overflows.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb


def _check(M: int, i: int) -> None:
    if M < 2:
        raise ValueError("M must be at least 2")
    if not 1 <= i <= M - 1:
        raise ValueError(f"i={i} outside 1..{M - 1}")


def phi(M: int, i: int) -> int:
    """``sum_{j=1}^{i} C(M-j-1, i-j) 2^(j-1)``."""
    _check(M, i)
    return sum(comb(M - j - 1, i - j) << (j - 1) for j in range(1, i + 1))


def subset_count(M: int, i: int) -> int:
    """Number of subsets of ``{1, .., M-1}`` with at most ``i - 1`` elements."""
    _check(M, i)
    return sum(comb(M - 1, j) for j in range(i))


def lhs_exact(M: int, i: int) -> Fraction:
    """The weighted two-sided sum; it equals one for every valid ``(M, i)``."""
    _check(M, i)
    # scaled by 2^M every term is an integer
    left = sum(comb(M - j - 1, i - j) << j for j in range(1, i + 1))
    right = sum(comb(M - r - 1, M - i - r) << r for r in range(1, M - i + 1))
    return Fraction(left + right, 1 << M)

def identity_check(M: int) -> bool:
    """``phi(i) + phi(M - i) == 2^(M-1)`` and the weighted sum is one, for every ``i``."""
    full = 1 << (M - 1)
    return all(phi(M, i) + phi(M, M - i) == full and lhs_exact(M, i) == 1
               for i in range(1, M))
