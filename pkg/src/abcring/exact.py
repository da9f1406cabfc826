"""Brute-force oracles on tiny rings (every configuration enumerated).

These exist to check the fast paths: the Gibbs law against the stationary
vector of the full generator, the finite-beta trace rates on the segregated
states against Monte Carlo, and the structural ``Xi^N`` test against the
closure that defines it.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from numba import njit
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .families import all_xi, build
from .neighborhoods import BFS_RING_LIMIT, GuardError, blue_neighbors, bfs_neighborhood, red_neighbors
from .ring import ModelParams, RingConfig, hamiltonian_scaled, make_omega


@lru_cache(maxsize=8)
def _states(counts: tuple[int, int, int]) -> tuple[np.ndarray, dict]:
    L = sum(counts)
    if L > BFS_RING_LIMIT:
        raise GuardError(f"exhaustive enumeration refused for ring size {L}")
    rows = []
    for a_pos in itertools.combinations(range(L), counts[0]):
        rest = [j for j in range(L) if j not in a_pos]
        for b_pos in itertools.combinations(rest, counts[1]):
            row = [2] * L
            for j in a_pos:
                row[j] = 0
            for j in b_pos:
                row[j] = 1
            rows.append(row)
    rows.sort()
    arr = np.array(rows, dtype=np.int8)
    index = {r.tobytes(): i for i, r in enumerate(arr)}
    return arr, index


def enumerate_states(params: ModelParams) -> tuple[np.ndarray, dict]:
    """All configurations as rows of an ``int8`` array plus a bytes -> row index map."""
    return _states(params.counts)


def state_codes(params: ModelParams) -> np.ndarray:
    """Base-3 code of every enumerated state (site ``-N`` is the least significant digit)."""
    arr, _ = enumerate_states(params)
    weights = 3 ** np.arange(params.ring_size, dtype=np.int64)
    return arr.astype(np.int64) @ weights


def generator(params: ModelParams, beta: float) -> sp.csr_matrix:
    arr, index = enumerate_states(params)
    q = math.exp(-beta)
    L = params.ring_size
    rows, cols, vals = [], [], []
    for i, s in enumerate(arr):
        t = np.roll(s, -1)
        for e in range(L):
            a, b = int(s[e]), int(t[e])
            if a == b:
                continue
            rate = q if (a + 1) % 3 == b else 1.0
            moved = s.copy()
            moved[e], moved[(e + 1) % L] = b, a
            rows.append(i)
            cols.append(index[moved.tobytes()])
            vals.append(rate)
    n = arr.shape[0]
    Q = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    return (Q - sp.diags(np.asarray(Q.sum(axis=1)).ravel())).tocsr()


@njit(cache=True)
def _gth(P):
    # Grassmann-Taksar-Heyman elimination: no subtractions, so small entries keep relative accuracy
    n = P.shape[0]
    for k in range(n - 1, 0, -1):
        s = 0.0
        for j in range(k):
            s += P[k, j]
        for i in range(k):
            f = P[i, k] / s
            if f != 0.0:
                for j in range(k):
                    P[i, j] += f * P[k, j]
        for i in range(k):
            P[i, k] /= s
    pi = np.zeros(n)
    pi[0] = 1.0
    for k in range(1, n):
        acc = 0.0
        for i in range(k):
            acc += pi[i] * P[i, k]
        pi[k] = acc
    return pi / pi.sum()


def stationary(params: ModelParams, beta: float) -> np.ndarray:
    """Stationary law of the full generator (GTH elimination on the off-diagonal rates)."""
    P = generator(params, beta).toarray()
    np.fill_diagonal(P, 0.0)
    return _gth(P)


def gibbs(params: ModelParams, beta: float) -> np.ndarray:
    arr, _ = enumerate_states(params)
    L = params.ring_size
    energies = np.array([hamiltonian_scaled(RingConfig._trusted(params, s)) for s in arr], dtype=float) / L
    w = np.exp(-beta * (energies - energies.min()))
    return w / w.sum()


def trace_rates_exact(params: ModelParams, beta: float) -> dict[int, float]:
    """Jump rates of the trace on the segregated states, from ``omega_0`` to ``omega_k``."""
    arr, index = enumerate_states(params)
    n = params.N
    Q = generator(params, beta).tocsc()
    om = [index[make_omega(params, k).key] for k in range(-n, n + 1)]
    rest = np.setdiff1d(np.arange(arr.shape[0]), om)
    A = Q[rest][:, rest].tocsc()
    B = Q[rest][:, om].toarray()
    harm = spla.splu(A).solve(-B)
    row = Q[om[n]].toarray().ravel()
    rates = row[rest] @ harm
    rates += row[om]
    return {k: float(rates[k + n]) for k in range(-n, n + 1) if k != 0}


def excursion_meeting_exact(params: ModelParams, beta: float) -> dict[int, float]:
    """Probability that an excursion from ``omega_0`` first reaches red depth ``M`` at ``zeta(0, a, i)``
    before returning to ``omega_0``, summed over the minimal species ``a``; keyed by ``i``."""
    from .families import make_zeta

    arr, index = enumerate_states(params)
    M = params.M
    levels = bfs_neighborhood(params, 0, M)
    target_level = {c.key for c in levels[M]}
    Q = generator(params, beta).tocsc()
    start = index[make_omega(params, 0).key]
    stop = [index[key] for key in target_level] + [start]
    free = np.setdiff1d(np.arange(arr.shape[0]), stop)
    A = Q[free][:, free].tocsc()
    lu = spla.splu(A)
    out = {}
    for alpha in params.minimal_species:
        for i in range(M + 1):
            tgt = index[make_zeta(params, 0, alpha, i).key]
            h = lu.solve(-Q[free][:, [tgt]].toarray().ravel())
            row = Q[start].toarray().ravel()
            prob = (row[free] @ h + row[tgt]) / -row[start]
            out[i] = out.get(i, 0.0) + float(prob)
    return out


def xi_closure(params: ModelParams) -> set[bytes]:
    """The set defining ``Xi^N``: blue-move closures of the depth-``M`` red balls and of ``R(G^N)``."""
    if params.ring_size > BFS_RING_LIMIT:
        raise GuardError("closure refused beyond the tiny-ring limit")
    seeds = {}
    for k in range(-params.N, params.N + 1):
        for level in bfs_neighborhood(params, k, params.M):
            for c in level:
                seeds[c.key] = c
    for cid in all_xi(params):
        for c in red_neighbors(build(params, cid)):
            seeds[c.key] = c
    seen = dict(seeds)
    stack = list(seeds.values())
    while stack:
        c = stack.pop()
        for d in blue_neighbors(c):
            if d.key not in seen:
                seen[d.key] = d
                stack.append(d)
    return set(seen)
