"""Compiled event loop.

The loop mutates the ring arrays in place and returns a status code whenever
it needs something from Python (fresh random numbers, an emptied log buffer)
or a stop condition fires.  All scalar state travels through the argument list
and the returned tuple, so a call can be resumed exactly where it stopped.

Edge ``e`` (storage order) joins sites ``e`` and ``e + 1 mod L``.  Red and blue
edges are kept in two swap-remove lists; because only two rate values exist,
one uniform picks the bucket and the position inside it.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MAX_EVENTS = 0
MAX_TIME = 1
HIT_OMEGA = 2
HIT_DEPTH = 3
NEED_UNIFORM = 4
NEED_EXPONENTIAL = 5
LOG_FULL = 6
HIT_TABLE = 7

BLACK, RED, BLUE = 0, 1, 2


@njit(cache=True, nogil=True)
def classify(a, b):
    if a == b:
        return BLACK
    if (a + 1) % 3 == b:
        return RED
    return BLUE


@njit(cache=True, nogil=True)
def _remove(lst, pos, n, e):
    j = pos[e]
    last = lst[n - 1]
    lst[j] = last
    pos[last] = j
    pos[e] = -1
    return n - 1


@njit(cache=True, nogil=True)
def _add(lst, pos, n, e):
    lst[n] = e
    pos[e] = n
    return n + 1


@njit(cache=True, nogil=True)
def build_lists(sites, eclass, red, red_pos, blue, blue_pos):
    L = sites.size
    n_red = 0
    n_blue = 0
    for e in range(L):
        red_pos[e] = -1
        blue_pos[e] = -1
        c = classify(sites[e], sites[(e + 1) % L])
        eclass[e] = c
        if c == RED:
            n_red = _add(red, red_pos, n_red, e)
        elif c == BLUE:
            n_blue = _add(blue, blue_pos, n_blue, e)
    return n_red, n_blue


@njit(cache=True, nogil=True)
def anchor_index(sites):
    """Storage index of the first site of the A block (meaningful on segregated states)."""
    L = sites.size
    for j in range(L):
        if sites[j] == 0 and sites[(j - 1) % L] != 0:
            return j
    return -1


@njit(cache=True, nogil=True)
def advance(sites, eclass, red, red_pos, blue, blue_pos, n_red, n_blue,
            q, embedded, clock, comp, t_max, events, max_events,
            uni, u_idx, expo, e_idx,
            stop_omega, exclude_anchor,
            track_depth, depth_target, depth, reached, visits,
            table, pow3, code, stop_table, time_by_code,
            log_t, log_e, log_c, log_n, occ):
    L = sites.size
    use_table = table.size > 0
    use_log = log_t.size > 0
    use_hist = time_by_code.size > 0
    status = MAX_EVENTS
    anchor = -1
    while True:
        if events >= max_events:
            status = MAX_EVENTS
            break
        if use_log and log_n >= log_t.size:
            status = LOG_FULL
            break
        if u_idx >= uni.size:
            status = NEED_UNIFORM
            break
        if not embedded and e_idx >= expo.size:
            status = NEED_EXPONENTIAL
            break
        total = n_blue + q * n_red
        if embedded:
            dt = 1.0 / total
        else:
            dt = expo[e_idx] / total
        outside = not (n_blue == 0 and n_red == 3)
        member = True
        if use_table:
            member = table[code] != 0
        if clock + dt > t_max:
            rest = t_max - clock
            if rest > 0.0:
                if outside:
                    occ[0] += rest
                if not member:
                    occ[1] += rest
                if use_hist:
                    time_by_code[code] += rest
            clock = t_max
            comp = 0.0
            if not embedded:
                e_idx += 1
            status = MAX_TIME
            break
        if outside:
            occ[0] += dt
        if not member:
            occ[1] += dt
        if use_hist:
            time_by_code[code] += dt
        y = dt - comp
        t = clock + y
        comp = (t - clock) - y
        clock = t
        if not embedded:
            e_idx += 1

        x = uni[u_idx] * total
        u_idx += 1
        if x < n_blue:
            j = int(x)
            if j >= n_blue:
                j = n_blue - 1
            e = blue[j]
        else:
            j = int((x - n_blue) / q)
            if j >= n_red:
                j = n_red - 1
            e = red[j]
        was_red = eclass[e] == RED
        f = (e + 1) % L
        a = sites[e]
        b = sites[f]
        sites[e] = b
        sites[f] = a
        if use_table:
            code += (b - a) * pow3[e] + (a - b) * pow3[f]
        for g in ((e - 1) % L, e, f):
            old = eclass[g]
            new = classify(sites[g], sites[(g + 1) % L])
            if old == new:
                continue
            if old == RED:
                n_red = _remove(red, red_pos, n_red, g)
            elif old == BLUE:
                n_blue = _remove(blue, blue_pos, n_blue, g)
            if new == RED:
                n_red = _add(red, red_pos, n_red, g)
            elif new == BLUE:
                n_blue = _add(blue, blue_pos, n_blue, g)
            eclass[g] = new
        events += 1
        if use_log:
            log_t[log_n] = clock
            log_e[log_n] = e
            log_c[log_n] = eclass[e]
            log_n += 1

        if track_depth and not reached:
            if was_red:
                depth += 1
            else:
                depth -= 1
        if n_blue == 0 and n_red == 3:
            if track_depth:
                if reached:
                    anchor = anchor_index(sites)
                    if anchor != exclude_anchor:
                        status = HIT_OMEGA
                        break
                reached = False
                depth = 0
                visits += 1
            elif stop_omega:
                anchor = anchor_index(sites)
                if anchor != exclude_anchor:
                    status = HIT_OMEGA
                    break
        if track_depth and not reached and depth == depth_target:
            reached = True
            status = HIT_DEPTH
            break
        if stop_table and use_table and table[code] != 0:
            status = HIT_TABLE
            break
    return (status, n_red, n_blue, clock, comp, events, u_idx, e_idx,
            depth, reached, visits, code, log_n, anchor)
