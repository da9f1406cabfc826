"""Red-move neighborhoods of the segregated states and the sets built from them.

``V(omega_k)`` is everything reachable from ``omega_k`` by swapping red edges
only; the red depth of a member is the number of such swaps (all red paths
between two members have the same length).  Two routes to it are provided:

* ``bfs_neighborhood`` explores the ball level by level (tiny rings only);
* ``red_depth`` reads the depth off a configuration directly by matching
  particles to their home block and counting crossed pairs, which is O(depth * L).

The same module holds the structural membership tests for ``Gamma^N`` (within
red depth ``M`` or two transpositions of some ``omega_k``) and for ``Xi^N``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .families import XI, candidate_anchors, family_labels
from .ring import (EdgeClass, ModelParams, RingConfig, Species, edge_classes,
                   make_omega, swap_edge)

BFS_RING_LIMIT = 13


class GuardError(ValueError):
    pass


def red_neighbors(config: RingConfig) -> list[RingConfig]:
    n = config.params.N
    cls = edge_classes(config)
    return [swap_edge(config, int(e) - n) for e in np.flatnonzero(cls == EdgeClass.RED)]


def blue_neighbors(config: RingConfig) -> list[RingConfig]:
    n = config.params.N
    cls = edge_classes(config)
    return [swap_edge(config, int(e) - n) for e in np.flatnonzero(cls == EdgeClass.BLUE)]


def bfs_neighborhood(params: ModelParams, k: int, depth: int) -> list[list[RingConfig]]:
    """Levels ``Delta^0_k .. Delta^depth_k`` of the red-move ball around ``omega_k``."""
    if params.ring_size > BFS_RING_LIMIT and depth > params.M:
        raise GuardError(f"red BFS to depth {depth} refused for ring size {params.ring_size}")
    levels = [[make_omega(params, k)]]
    seen = {levels[0][0].key}
    for _ in range(depth):
        nxt = []
        for c in levels[-1]:
            for d in red_neighbors(c):
                if d.key not in seen:
                    seen.add(d.key)
                    nxt.append(d)
        levels.append(nxt)
    return levels


@dataclass(frozen=True)
class Decomposition:
    red: tuple[int, ...]
    blue: tuple[int, ...]
    blue_back: tuple[int, ...]
    blue_out: tuple[int, ...]


def decompose(config: RingConfig, depth: int, levels: list[list[RingConfig]]) -> Decomposition:
    """Split the blue edges of a depth-``depth`` ball member into B* (back into V) and D* (out).

    A blue swap from a member at depth ``n`` stays in ``V(omega_k)`` exactly when
    it lands on level ``n - 1`` of the explored ball.
    """
    n = config.params.N
    cls = edge_classes(config)
    red = tuple(int(e) - n for e in np.flatnonzero(cls == EdgeClass.RED))
    blue = tuple(int(e) - n for e in np.flatnonzero(cls == EdgeClass.BLUE))
    below = {c.key for c in levels[depth - 1]} if depth >= 1 else set()
    back = tuple(e for e in blue if swap_edge(config, e).key in below)
    out = tuple(e for e in blue if e not in back)
    return Decomposition(red, blue, back, out)


def red_depth(config: RingConfig, k: int, max_depth: int) -> int | None:
    """Red depth of ``config`` from ``omega_k`` if it is at most ``max_depth``, else None.

    Same-species particles never overtake each other under red swaps, so the
    j-th particle of a block (in ring order, read near the block) is matched to
    the j-th home site.  Each red swap makes exactly one pair cross, and only
    pairs ``(a, a + 1)`` with ``a`` at home to the left may cross.  The depth is
    the number of crossed pairs, counted on the periodic lift of the ring.  The
    lifted displacements of a member sum to zero.
    """
    p = config.params
    L, n = p.ring_size, p.N
    offsets = p.block_offsets()
    xs, ys, sp = [], [], []
    for alpha in Species:
        na = p.counts[alpha]
        start = k + offsets[alpha]
        center = start + (na - 1) / 2
        sites = np.flatnonzero(config.sites == alpha) - n
        lifted = np.sort(sites + L * np.rint((center - sites) / L).astype(np.int64))
        xs.append(np.arange(start, start + na))
        ys.append(lifted)
        sp.append(np.full(na, int(alpha)))
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    s = np.concatenate(sp)
    disp = y - x
    # a red swap moves two particles by +1 and -1; a rigid rotation does not cancel
    if disp.sum() != 0 or np.abs(disp).max(initial=0) > max_depth:
        return None
    moved = np.flatnonzero(disp != 0)
    still = np.ones(x.size, dtype=bool)
    still[moved] = False
    total = 0
    for idx, i in enumerate(moved):
        others = np.concatenate([moved[idx + 1:], np.flatnonzero(still)])
        for w in (-L, 0, L):
            dx = x[i] - (x[others] + w)
            dy = y[i] - (y[others] + w)
            crossed = others[dx * dy < 0]
            if crossed.size == 0:
                continue
            left_i = (x[i] < x[crossed] + w)
            left = np.where(left_i, s[i], s[crossed])
            right = np.where(left_i, s[crossed], s[i])
            if np.any((left + 1) % 3 != right):
                return None
            total += crossed.size
            if total > max_depth:
                return None
    return total


def in_red_ball(config: RingConfig, depth: int) -> int | None:
    """Anchor ``k`` with red depth of ``config`` from ``omega_k`` at most ``depth``, else None."""
    for k in candidate_anchors(config, 2 * depth):
        if red_depth(config, k, depth) is not None:
            return k
    return None


def transposition_distance_at_most_two(config: RingConfig, k: int) -> bool:
    ref = make_omega(config.params, k).sites
    mism = np.flatnonzero(ref != config.sites)
    m = mism.size
    if m <= 3:
        return True
    if m > 4:
        return False
    have = config.sites[mism]
    want = ref[mism]
    a = 0
    for b in range(1, 4):
        c, d = [j for j in range(1, 4) if j != b]
        if (have[a] == want[b] and have[b] == want[a]
                and have[c] == want[d] and have[d] == want[c]):
            return True
    return False


def gamma_anchor(config: RingConfig) -> int | None:
    """Anchor of a ``Gamma^N_k`` containing ``config`` (nearest ``omega_k`` first), else None."""
    p = config.params
    for k in candidate_anchors(config, max(2 * p.M, 4)):
        if transposition_distance_at_most_two(config, k) or red_depth(config, k, p.M) is not None:
            return k
    return None


def _two_intruder_pattern(config: RingConfig, k: int, alpha: Species) -> bool:
    """``omega_k`` with one particle of the preceding block at offset ``a`` and one of the
    following block at offset ``c`` inside block ``alpha``, ``a < c``, ``a <= N_alpha - 2``,
    ``c >= 1`` (offsets relative to the first site of the block)."""
    p = config.params
    L, n = p.ring_size, p.N
    na = p.counts[alpha]
    f = k + p.block_offsets()[alpha]
    ref = make_omega(p, k).sites
    seg = (np.arange(f - 1, f + na + 1) + n) % L
    outside = np.ones(L, dtype=bool)
    outside[seg] = False
    if np.any(ref[outside] != config.sites[outside]):
        return False
    vals = config.sites[seg]
    prev_pos = np.flatnonzero(vals == alpha.pred())
    next_pos = np.flatnonzero(vals == alpha.succ())
    if prev_pos.size != 1 or next_pos.size != 1:
        return False
    a, c = int(prev_pos[0]) - 1, int(next_pos[0]) - 1
    return a < c and a <= na - 2 and c >= 1


def xi_anchor(config: RingConfig) -> int | None:
    """Anchor ``k`` of a piece ``Xi^N_k`` containing ``config``, else None.

    ``Xi^N`` is the blue-move closure of the depth-``M`` red balls together with
    the blue-move closure of the red neighbors of every ``xi``.  Working the
    closures out by hand leaves three kinds of members:

    * configurations within red depth ``M`` of some ``omega_k``;
    * ``omega_k`` with two intruders in one block (see ``_two_intruder_pattern``);
    * an ``xi`` or a configuration one red swap away from an ``xi``.
    """
    p = config.params
    cands = candidate_anchors(config, max(2 * p.M, 6))
    if not cands:
        return None
    for k in cands:
        if red_depth(config, k, p.M) is not None:
            return k
    for k in cands:
        for alpha in Species:
            if _two_intruder_pattern(config, k, alpha):
                return k
    for lab in family_labels(config):
        if lab.kind == XI:
            return lab.k
    for d in blue_neighbors(config):
        for lab in family_labels(d):
            if lab.kind == XI:
                return lab.k
    return None


def xi_membership(params: ModelParams, config: RingConfig) -> bool:
    if config.params != params:
        config = RingConfig._trusted(params, config.sites)
    return xi_anchor(config) is not None
