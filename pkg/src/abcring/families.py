"""Special configurations near the segregated states and their recognition.

``zeta(k, a, i)`` is the segregated state ``omega_k`` in which the last particle
of the block preceding ``a`` has been pushed ``i`` sites into block ``a`` and the
first particle of the block following ``a`` has been pushed in from the other
side so that the two intruders meet between offsets ``i - 1`` and ``i``.  The
intruders sit next to each other on a blue edge.  ``xi(k, a, i)`` is the same
picture after that blue edge has been swapped, so every edge of ``xi`` is red
or black.

Two labels name the same configuration at the block ends::

    zeta(k, a, N_a)     == zeta(k - 1, a + 1, 0)
    xi(k, a, N_a - 1)   == xi(k - 1, a + 1, 1)

Canonical identifiers keep the smallest ``k`` (in ``-N..N``), then the first
species in the order A, B, C.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ring import (ModelParams, RingConfig, Species, edge_counts, make_omega,
                   omega_anchor, shift, transpose)

OMEGA, ZETA, XI, OTHER = "omega", "zeta", "xi", "other"


@dataclass(frozen=True)
class ConfigId:
    kind: str
    k: int | None = None
    alpha: Species | None = None
    i: int | None = None

    def __str__(self) -> str:
        if self.kind == OMEGA:
            return f"omega[{self.k}]"
        if self.kind == OTHER:
            return "other"
        return f"{self.kind}[{self.k},{self.alpha.name},{self.i}]"

    def sort_key(self):
        return (self.k, int(self.alpha) if self.alpha is not None else -1, self.i or 0)


def Omega(k: int) -> ConfigId:
    return ConfigId(OMEGA, int(k))


def Zeta(k: int, alpha, i: int) -> ConfigId:
    return ConfigId(ZETA, int(k), Species(alpha), int(i))


def Xi(k: int, alpha, i: int) -> ConfigId:
    return ConfigId(XI, int(k), Species(alpha), int(i))


OTHER_ID = ConfigId(OTHER)


def _start(params: ModelParams, alpha: Species) -> int:
    return params.block_offsets()[alpha]


def make_zeta(params: ModelParams, k: int, alpha, i: int) -> RingConfig:
    alpha = Species(alpha)
    n_alpha = params.counts[alpha]
    if not 0 <= i <= n_alpha:
        raise IndexError(f"zeta index i={i} outside 0..{n_alpha}")
    f = _start(params, alpha)
    f_next = _start(params, alpha.succ())
    if alpha is Species.C:
        f_next = params.ring_size
    w = make_omega(params, 0)
    if i:
        w = transpose(w, f - 1, f - 1 + i)
    if f + i != f_next:
        w = transpose(w, f_next, f + i)
    return shift(w, k)


def make_xi(params: ModelParams, k: int, alpha, i: int) -> RingConfig:
    alpha = Species(alpha)
    n_alpha = params.counts[alpha]
    if not 1 <= i <= n_alpha - 1:
        raise IndexError(f"xi index i={i} outside 1..{n_alpha - 1}")
    f = _start(params, alpha)
    return shift(transpose(make_zeta(params, 0, alpha, i), f + i - 1, f + i), k)


def build(params: ModelParams, cid: ConfigId) -> RingConfig:
    if cid.kind == OMEGA:
        return make_omega(params, cid.k)
    if cid.kind == ZETA:
        return make_zeta(params, cid.k, cid.alpha, cid.i)
    if cid.kind == XI:
        return make_xi(params, cid.k, cid.alpha, cid.i)
    raise ValueError("cannot build an unidentified configuration")


def canonical(params: ModelParams, cid: ConfigId) -> ConfigId:
    """Canonical representative of a zeta/xi label (other kinds are returned unchanged)."""
    if cid.kind not in (ZETA, XI):
        return cid
    labels = [cid]
    n_alpha = params.counts[cid.alpha]
    last = n_alpha if cid.kind == ZETA else n_alpha - 1
    first = 0 if cid.kind == ZETA else 1
    if cid.i == last:
        labels.append(ConfigId(cid.kind, params.wrap(cid.k - 1), cid.alpha.succ(), first))
    if cid.i == first:
        labels.append(ConfigId(cid.kind, params.wrap(cid.k + 1), cid.alpha.pred(),
                               params.counts[cid.alpha.pred()] - (0 if cid.kind == ZETA else 1)))
    return min(labels, key=ConfigId.sort_key)


@lru_cache(maxsize=64)
def _omega_indicators(params: ModelParams) -> np.ndarray:
    w = make_omega(params, 0).sites
    return np.fft.rfft(np.stack([(w == c).astype(float) for c in range(3)]), axis=1)


def anchor_distances(config: RingConfig) -> np.ndarray:
    """Hamming distance from ``config`` to ``omega_k``; entry ``k + N`` for ``k`` in -N..N.

    Agreements with every rotation of the reference state come from one
    circular cross-correlation per species.
    """
    p = config.params
    L, n = p.ring_size, p.N
    s = config.sites
    ind = np.fft.rfft(np.stack([(s == c).astype(float) for c in range(3)]), axis=1)
    corr = np.fft.irfft(ind * np.conj(_omega_indicators(p)), n=L, axis=1).sum(axis=0)
    agree = np.rint(corr).astype(np.int64)  # agree[t] compares with omega shifted by t
    ks = np.arange(-n, n + 1)
    return L - agree[ks % L]


def candidate_anchors(config: RingConfig, max_distance: int) -> list[int]:
    """Anchors within Hamming distance ``max_distance``, nearest first (ties by smallest ``k``)."""
    dist = anchor_distances(config)
    n = config.params.N
    close = np.flatnonzero(dist <= max_distance)
    close = close[np.argsort(dist[close], kind="stable")]
    return [int(j) - n for j in close]


def family_labels(config: RingConfig) -> list[ConfigId]:
    """Every omega/zeta/xi label naming ``config`` (uncanonicalized)."""
    p = config.params
    k0 = omega_anchor(config)
    if k0 is not None:
        return [Omega(k0)]
    red, blue = edge_counts(config)
    if red + blue > 9:
        return []
    out = []
    n = p.N
    for k in candidate_anchors(config, 4):
        ref = make_omega(p, k).sites
        mism = np.flatnonzero(ref != config.sites)
        offs = {int((j - n - k) % p.ring_size) for j in mism}
        for alpha in Species:
            f = _start(p, alpha)
            n_alpha = p.counts[alpha]
            tried = set()
            for o in offs:
                for i in (o - f, o - f + 1):
                    if i in tried:
                        continue
                    tried.add(i)
                    if 0 <= i <= n_alpha and make_zeta(p, k, alpha, i) == config:
                        out.append(Zeta(k, alpha, i))
                    if 1 <= i <= n_alpha - 1 and make_xi(p, k, alpha, i) == config:
                        out.append(Xi(k, alpha, i))
    return out


def recognize(params: ModelParams, config: RingConfig) -> ConfigId:
    if config.params != params:
        config = RingConfig._trusted(params, config.sites)
    labels = family_labels(config)
    if not labels:
        return OTHER_ID
    return min(labels, key=ConfigId.sort_key)


@lru_cache(maxsize=256)
def zeta_table(params: ModelParams, k: int) -> dict:
    """Map configuration bytes of every ``zeta(k, a, i)`` to ``(a, i)`` for a fixed anchor."""
    table = {}
    for alpha in Species:
        for i in range(params.counts[alpha] + 1):
            table[make_zeta(params, k, alpha, i).key] = (alpha, i)
    return table


def all_xi(params: ModelParams) -> list[ConfigId]:
    """Canonical identifiers of all xi configurations."""
    seen = set()
    for k in range(-params.N, params.N + 1):
        for alpha in Species:
            for i in range(1, params.counts[alpha]):
                seen.add(canonical(params, Xi(k, alpha, i)))
    return sorted(seen, key=ConfigId.sort_key)
