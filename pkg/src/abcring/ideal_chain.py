"""Exact analytics of the limiting absorbing chain among the xi configurations.

Seen from the segregated states, a transition at low temperature goes through
the xi configurations of one minimal species.  In the limit those form a ring
of transient states walked by a discrete chain (3/10 to each neighbor and 2/5
into the segregated state below for an interior state; 3/14 and 2/7 twice for
a corner) and every segregated state is absorbing.

The transient ring is a sequence of blocks: block ``b`` holds
``xi(-b, alpha + b, j)`` for ``j = 1 .. N_{alpha+b} - 2``, and the state after
the last one of a block is the corner ``j = 1`` of the next block (the two
labels name the same configuration).  The ring closes once both the anchor
and the species come back, after ``L`` blocks when ``3 | L`` and ``3L`` blocks
otherwise.  The first ``M - 1`` states of block 0, followed by the corner of
block 1, are ``xi(0, alpha, 1 .. M - 1)``, the starting points of the
absorption probabilities ``p(i, k)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .families import ConfigId, Omega, Xi, canonical
from .linalg import solve_cyclic_tridiagonal
from .ring import ModelParams, ParamError, Species

EXACT_LIMIT = 64

INTERIOR_STEP = Fraction(3, 10)
INTERIOR_ABSORB = Fraction(2, 5)
CORNER_STEP = Fraction(3, 14)
CORNER_ABSORB = Fraction(2, 7)


@dataclass(frozen=True)
class TransientState:
    block: int
    j: int
    k: int
    species: Species

    @property
    def corner(self) -> bool:
        return self.j == 1


@dataclass(frozen=True)
class IdealChainSpec:
    params: ModelParams
    alpha: Species
    states: tuple[TransientState, ...]
    ids: tuple[ConfigId, ...]

    def __len__(self) -> int:
        return len(self.states)

    def step(self, s: int) -> Fraction:
        return CORNER_STEP if self.states[s].corner else INTERIOR_STEP

    def absorbers(self, s: int) -> dict[int, Fraction]:
        """Absorbing targets of transient state ``s`` as ``{k: probability}``."""
        st = self.states[s]
        if st.corner:
            nxt = self.params.wrap(st.k + 1)
            return {st.k: CORNER_ABSORB, nxt: CORNER_ABSORB}
        return {st.k: INTERIOR_ABSORB}

    def row(self, s: int) -> dict:
        """Full jump distribution out of transient state ``s`` keyed by ConfigId."""
        n = len(self.states)
        out: dict = {}
        for t in ((s - 1) % n, (s + 1) % n):
            out[self.ids[t]] = out.get(self.ids[t], 0) + self.step(s)
        for k, p in self.absorbers(s).items():
            out[Omega(k)] = out.get(Omega(k), 0) + p
        return out


def _check_alpha(params: ModelParams, alpha) -> Species:
    alpha = Species(alpha)
    params.require_metastable()
    if params.counts[alpha] != params.M:
        raise ParamError("alpha", f"species {alpha.name} is not of minimal size {params.M}")
    return alpha


def build_ideal_chain(params: ModelParams, alpha) -> IdealChainSpec:
    alpha = _check_alpha(params, alpha)
    L = params.ring_size
    blocks = L if L % 3 == 0 else 3 * L
    states = []
    for b in range(blocks):
        gamma = Species((alpha + b) % 3)
        k = params.wrap(-b)
        for j in range(1, params.counts[gamma] - 1):
            states.append(TransientState(b, j, k, gamma))
    ids = tuple(canonical(params, Xi(s.k, s.species, s.j)) for s in states)
    return IdealChainSpec(params, alpha, tuple(states), ids)


@dataclass(frozen=True)
class AbsorptionTable:
    """``p[i - 1, k + N]`` is the probability that the chain started at ``xi(0, alpha, i)``
    (``i = 1 .. M - 1``) is absorbed at ``omega_k``."""

    params: ModelParams
    alpha: Species
    p: np.ndarray
    exact: bool
    row_sums: np.ndarray

    def prob(self, i: int, k: int) -> float | Fraction:
        return self.p[i - 1, self.params.wrap(k) + self.params.N]

    @property
    def ks(self) -> range:
        return range(-self.params.N, self.params.N + 1)

    @property
    def g(self) -> np.ndarray:
        """``g(k) = sum_i p(i, k)``, indexed by ``k + N``."""
        return self.p.sum(axis=0)

    def g_at(self, k: int):
        return self.g[self.params.wrap(k) + self.params.N]

    def to_json(self) -> str:
        par = self.params
        n = par.N
        entries = [{"i": i, "k": k, "p": float(self.p[i - 1, k + n])}
                   for i in range(1, par.M) for k in self.ks]
        g = [{"k": k, "g": float(self.g[k + n])} for k in self.ks]
        return json.dumps({"params": _params_dict(par), "alpha": self.alpha.name,
                           "entries": entries, "g": g}, indent=1)


def _params_dict(p: ModelParams) -> dict:
    return {"N_A": p.n_a, "N_B": p.n_b, "N_C": p.n_c, "beta": p.beta}


def absorption_solve(spec: IdealChainSpec, exact: bool | None = None) -> AbsorptionTable:
    """Solve ``(I - Q) P = R`` by cyclic tridiagonal elimination.

    Rational arithmetic when the ring has at most ``EXACT_LIMIT`` states (or when
    ``exact`` is forced), doubles otherwise.
    """
    par = spec.params
    n, L, N = len(spec), par.ring_size, par.N
    if exact is None:
        exact = n <= EXACT_LIMIT
    one = Fraction(1) if exact else 1.0
    conv = (lambda x: x) if exact else float
    lower = [conv(-spec.step(s)) for s in range(n)]
    upper = list(lower)
    diag = [one] * n
    rhs = np.full((n, L), Fraction(0) if exact else 0.0, dtype=object if exact else float)
    for s in range(n):
        for k, pr in spec.absorbers(s).items():
            rhs[s, k + N] += conv(pr)
    P = solve_cyclic_tridiagonal(lower, diag, upper, rhs)
    sums = P.sum(axis=1)
    if not exact:
        resid = np.abs(sums - 1.0).max()
        if resid > 1e-9:
            raise ArithmeticError(f"absorption rows do not sum to one (residual {resid:g})")
    return AbsorptionTable(par, spec.alpha, P[:par.M - 1].copy(), exact, sums)


@lru_cache(maxsize=64)
def absorption_table(params: ModelParams, alpha, exact: bool | None = None) -> AbsorptionTable:
    params = params.with_beta(0.0)
    return absorption_solve(build_ideal_chain(params, alpha), exact)


# ----------------------------------------------------------------------------
# closed form of g


def sum_prefactor(M: int) -> Fraction:
    """``sum_{i=1}^{M-1} p(i) / (p(1) + p(M-1))`` for any solution ``h1 3^i + h2 3^-i``
    of the interior recurrence; equals 1 at ``M = 3``."""
    return Fraction(3, 2) - Fraction(2, 3 ** (M - 2) + 1)


@dataclass(frozen=True)
class ClosedForm:
    g: float | Fraction
    h1: float | Fraction
    h2: float | Fraction
    offset: int


def g_closed(params: ModelParams, alpha, k: int, p_first, p_last) -> ClosedForm:
    """``g(k)`` from the two boundary values ``p(1, k)`` and ``p(M - 1, k)``.

    Interior rows give ``p(i) = (3/10) p(i-1) + (3/10) p(i+1) + (2/5) [k = 0]``,
    so ``p(i) = c + h1 3^i + h2 3^-i`` with ``c = [k = 0]``.  ``h1`` and ``h2``
    are fixed by the two boundary values and the sum over ``i`` collapses to
    ``c (M - 1) + prefactor * (p(1) + p(M-1) - 2c)``.
    """
    _check_alpha(params, alpha)
    M = params.M
    c = 1 if params.wrap(k) == 0 else 0
    exact = isinstance(p_first, Fraction) and isinstance(p_last, Fraction)
    a, b = p_first - c, p_last - c
    if exact:
        # [3, 1/3; 3^(M-1), 3^-(M-1)] [h1; h2] = [a; b]
        x1, y1 = Fraction(3), Fraction(1, 3)
        x2, y2 = Fraction(3) ** (M - 1), Fraction(1, 3) ** (M - 1)
        pref = sum_prefactor(M)
    else:
        x1, y1, x2, y2 = 3.0, 1 / 3, 3.0 ** (M - 1), 3.0 ** -(M - 1)
        pref = float(sum_prefactor(M))
    det = x1 * y2 - y1 * x2
    h1 = (a * y2 - y1 * b) / det
    h2 = (x1 * b - a * x2) / det
    return ClosedForm(c * (M - 1) + pref * (a + b), h1, h2, c)


def g_closed_vector(table: AbsorptionTable) -> np.ndarray:
    """Closed-form ``g`` for every ``k`` (indexed by ``k + N``) from the table's boundary rows."""
    M = table.params.M
    return np.array([g_closed(table.params, table.alpha, k, table.p[0, k + table.params.N],
                              table.p[M - 2, k + table.params.N]).g for k in table.ks],
                    dtype=object if table.exact else float)


# ----------------------------------------------------------------------------
# limit rates


@dataclass(frozen=True)
class RateVector:
    """Limit rates ``r(k)`` of the trace on the segregated states, in units of ``e^{-M beta}``."""

    params: ModelParams
    rates: dict

    @property
    def total(self):
        return sum(self.rates.values())

    def __getitem__(self, k: int):
        return self.rates[self.params.wrap(k)]

    def ks(self) -> list[int]:
        return sorted(self.rates)

    def drift(self):
        return sum(k * r for k, r in self.rates.items())

    def second_moment(self):
        return sum(k * k * r for k, r in self.rates.items())

    def to_json(self) -> str:
        return json.dumps({"params": _params_dict(self.params),
                           "rates": [{"k": k, "r": float(self.rates[k])} for k in self.ks()],
                           "total": float(self.total)}, indent=1)


def limit_rates(params: ModelParams, exact: bool | None = None) -> RateVector:
    """``r(k) = (d/2) [|k| = 1] + (2/3) sum over minimal species of g(k)`` for ``k != 0``."""
    params.require_metastable()
    tables = [absorption_table(params.with_beta(0.0), a, exact) for a in params.minimal_species]
    n = params.N
    rational = all(t.exact for t in tables)
    half_d = Fraction(params.d, 2) if rational else params.d / 2
    two_thirds = Fraction(2, 3) if rational else 2 / 3
    rates = {}
    for k in range(-n, n + 1):
        if k == 0:
            continue
        val = sum(t.g[k + n] for t in tables) * two_thirds
        if abs(k) == 1:
            val = val + half_d
        rates[k] = val
    return RateVector(params, rates)


def limit_rate(params: ModelParams, k: int, exact: bool | None = None):
    if params.wrap(k) == 0:
        raise ValueError("no rate from a state to itself")
    return limit_rates(params, exact)[k]


def theta_beta(params: ModelParams) -> float:
    return params.theta_beta


def psi_bound(N: int, M: int, beta: float, c0: float = 1.0) -> float:
    """Envelope for the finite-temperature error of the trace rates, up to the unknown constant ``c0``.

    Only the bound is known; this is a diagnostic, not an estimate of the error.
    """
    return c0 * (N ** 2 * 4 ** M + N ** 3 * M * beta
                 + N ** 6 * 4 ** M * beta * math.exp(-beta)) * math.exp(-(M + 1) * beta)


def decay_bound(M: int, k: int) -> float:
    """Geometric bound on ``p(i, k)`` for ``k != 0``."""
    return 0.6 ** ((M - 2) * (abs(k) - 1))


# ----------------------------------------------------------------------------
# meeting positions and one-step rate tables


@dataclass(frozen=True)
class MeetingDistribution:
    q: tuple[Fraction, ...]
    profile: tuple[Fraction, ...]


def meeting_distribution(M: int) -> MeetingDistribution:
    """Weights ``q_i`` (prefactors of ``e^{-(M-1) beta}``) of the first meeting position
    ``i = 0 .. M`` and their normalization."""
    if M < 3:
        raise ValueError("M must be at least 3")
    q = tuple(Fraction(1, 3) if i in (0, M) else Fraction(2, 3) for i in range(M + 1))
    s = sum(q)
    return MeetingDistribution(q, tuple(x / s for x in q))


@dataclass(frozen=True)
class OneStepRates:
    """Limiting rate tables between segregated and xi configurations.

    ``from_omega`` rows are in units of ``e^{-M beta}``; ``from_xi`` rows in
    units of ``e^{-beta}``.
    """

    from_omega: dict
    from_xi: dict


def r1_matrices(params: ModelParams) -> OneStepRates:
    params.require_metastable()
    n = params.N
    half_d = Fraction(params.d, 2)
    from_omega = {}
    for k in range(-n, n + 1):
        row = {Omega(params.wrap(k - 1)): half_d, Omega(params.wrap(k + 1)): half_d}
        for a in params.minimal_species:
            for i in range(1, params.M):
                row[canonical(params, Xi(k, a, i))] = Fraction(2, 3)
        from_omega[Omega(k)] = row
    from_xi = {}
    for k in range(-n, n + 1):
        for g in Species:
            ng = params.counts[g]
            for i in range(1, ng):
                cid = canonical(params, Xi(k, g, i))
                if cid in from_xi:
                    continue
                from_xi[cid] = _xi_row(params, k, g, i)
    return OneStepRates(from_omega, from_xi)


def _xi_row(params: ModelParams, k: int, g: Species, i: int) -> dict:
    ng = params.counts[g]
    if i == ng - 1:
        # same configuration as the corner of the next block
        k, g, i = params.wrap(k - 1), g.succ(), 1
        ng = params.counts[g]
    half, two_thirds = Fraction(1, 2), Fraction(2, 3)
    row = {Omega(k): two_thirds}
    if i == 1:
        row[Omega(params.wrap(k + 1))] = two_thirds
        pg = g.pred()
        row[canonical(params, Xi(params.wrap(k + 1), pg, params.counts[pg] - 2))] = half
    else:
        row[canonical(params, Xi(k, g, i - 1))] = half
    row[canonical(params, Xi(k, g, i + 1))] = row.get(canonical(params, Xi(k, g, i + 1)), 0) + half
    return row
