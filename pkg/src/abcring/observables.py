"""Functionals of recorded trajectories: traces, hitting times, center of mass,
last-visit process and occupation fractions.

A path is a sequence of ``(state, holding time)`` pairs.  ``steps(log)`` turns
an EventLog into such a path; the functions below accept either.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .families import recognize
from .kmc import EventLog
from .neighborhoods import gamma_anchor, xi_anchor, xi_membership
from .ring import (ModelParams, RingConfig, Species, in_omega0, make_omega, omega_anchor,
                   shift)

__all__ = [
    "TracePath", "CirclePosition", "steps", "trace", "trace_path", "hitting_times",
    "center_of_mass", "wrap_circle", "circle_distance", "last_visit", "occupation_outside",
    "xi_membership", "timeseries_csv", "unwrap_series", "lastmass_deviation", "NOT_REACHED",
]

NOT_REACHED = math.inf


def steps(log: EventLog) -> Iterator[tuple[RingConfig, float]]:
    """``(configuration, holding time)`` for each state visited in the log."""
    prev_cfg, prev_t = None, 0.0
    for t, cfg in log.states():
        if prev_cfg is not None:
            yield prev_cfg, t - prev_t
        prev_cfg, prev_t = cfg, t
    yield prev_cfg, log.elapsed - prev_t


def _as_path(source) -> Iterable:
    return steps(source) if isinstance(source, EventLog) else source


@dataclass
class TracePath:
    states: list
    holding: list
    source: EventLog | None = None

    def __iter__(self):
        return iter(zip(self.states, self.holding))

    def __len__(self) -> int:
        return len(self.states)

    @property
    def total_time(self) -> float:
        return math.fsum(self.holding)


def trace_path(path, member: Callable) -> TracePath:
    """Keep the states in ``member`` with their holding times, drop the rest, merge repeats."""
    states, holding = [], []
    first = True
    for state, h in path:
        if first:
            if not member(state):
                raise ValueError("trace must start inside the set")
            first = False
        if not member(state):
            continue
        if states and states[-1] == state:
            holding[-1] += h
        else:
            states.append(state)
            holding.append(h)
    return TracePath(states, holding)


def trace(log: EventLog, member: Callable) -> TracePath:
    out = trace_path(steps(log), member)
    out.source = log
    return out


def hitting_times(source, member: Callable) -> tuple[float, float]:
    """``(H, H+)``: first time in the set, and first time in it after a state change.

    ``NOT_REACHED`` marks a time beyond the end of the record.
    """
    t = 0.0
    hit = plus = NOT_REACHED
    started_inside = None
    moved = False
    for state, h in _as_path(source):
        inside = bool(member(state))
        if started_inside is None:
            started_inside = inside
        if inside:
            if hit is NOT_REACHED:
                hit = t
            if (moved or not started_inside) and plus is NOT_REACHED:
                plus = t
                break
        moved = True
        t += h
    return hit, plus


# ----------------------------------------------------------------------------
# center of mass


def wrap_circle(x: float) -> float:
    """Representative of ``x`` in ``[-1, 1)``."""
    return (x + 1.0) % 2.0 - 1.0


def circle_distance(x: float, y: float) -> float:
    return abs(wrap_circle(x - y))


@dataclass(frozen=True)
class CirclePosition:
    wrapped: float
    unwrapped: float
    anchor: int | None

    @property
    def in_gamma(self) -> bool:
        return self.anchor is not None


def _a_mean(params: ModelParams, config: RingConfig, k: int) -> float:
    """Mean A position of ``config`` measured from anchor ``k``, each particle lifted next to the block."""
    L, n = params.ring_size, params.N
    rel = np.flatnonzero(shift(config, -k).sites == Species.A) - n
    center = (params.n_a - 1) / 2
    lifted = rel + L * np.rint((center - rel) / L)
    return float(lifted.mean())


def center_of_mass(params: ModelParams, config: RingConfig, anchor: int | None = None) -> CirclePosition:
    """Center of mass of the A particles as a point of ``[-1, 1)``; 0 off the Gamma sets."""
    if config.params != params:
        config = RingConfig._trusted(params, config.sites)
    k = gamma_anchor(config) if anchor is None else anchor
    if k is None:
        return CirclePosition(0.0, 0.0, None)
    value = wrap_circle((k + _a_mean(params, config, k)) / params.N)
    return CirclePosition(value, value, k)


def unwrap_series(values: Iterable[float]) -> list[float]:
    """Winding-aware companion: each increment is the wrapped increment mapped into ``[-1, 1)``."""
    out = []
    for v in values:
        out.append(v if not out else out[-1] + wrap_circle(v - wrap_circle(out[-1])))
    return out


# ----------------------------------------------------------------------------
# last visit and occupation


@dataclass
class LastVisitPath:
    times: np.ndarray
    values: np.ndarray

    def at(self, t: float) -> int:
        j = np.searchsorted(self.times, t, side="right") - 1
        return int(self.values[max(j, 0)])


def last_visit(source, member: Callable, coordinate: Callable | None = None) -> LastVisitPath:
    """Piecewise-constant record of the coordinate of the most recently visited set member.

    ``coordinate`` defaults to the anchor of a segregated state.  The value only
    changes at entries into the set.
    """
    coord = coordinate or omega_anchor
    times, values = [], []
    t = 0.0
    for state, h in _as_path(source):
        if member(state):
            x = coord(state)
            if not values:
                times.append(t)
                values.append(x)
            elif x != values[-1]:
                times.append(t)
                values.append(x)
        elif not values:
            raise ValueError("last-visit path must start inside the set")
        t += h
    return LastVisitPath(np.array(times), np.array(values))


def occupation_outside(source, member: Callable) -> float:
    """Fraction of the elapsed time spent outside ``member``."""
    inside = outside = 0.0
    for state, h in _as_path(source):
        if member(state):
            inside += h
        else:
            outside += h
    total = inside + outside
    return outside / total if total > 0 else 0.0


# ----------------------------------------------------------------------------
# comparisons along a trajectory


@dataclass(frozen=True)
class MassDeviation:
    """Circle distances along a path between coarse positions and the center of mass.

    ``to_last_visit`` is the largest distance between ``X/N + r_A/2`` (``X`` the
    anchor of the last visited segregated state, ``r_A = N_A/N``) and the center
    of mass; ``time_beyond`` is the fraction of time that distance exceeds
    ``tolerance``.  ``to_xi_anchor`` compares the center of mass with that of the
    segregated state anchoring the current piece of the Xi set.  ``off_gamma``
    counts samples where the center of mass is undefined (excluded).
    """

    to_last_visit: float
    time_beyond: float
    tolerance: float
    to_xi_anchor: float
    off_gamma: int
    samples: int


def lastmass_deviation(log: EventLog, tolerance: float | None = None) -> MassDeviation:
    p = log.params
    n, r_a = p.N, p.n_a / p.N
    if tolerance is None:
        tolerance = 1 / p.n_a + 1 / (2 * n)
    sup_last = sup_xi = 0.0
    beyond = total = 0.0
    off = count = 0
    last = None
    for cfg, h in steps(log):
        count += 1
        total += h
        k = omega_anchor(cfg)
        if k is not None:
            last = k
        if last is None:
            raise ValueError("log must start at a segregated state")
        c = center_of_mass(p, cfg)
        if not c.in_gamma:
            off += 1
            continue
        dev = circle_distance(last / n + r_a / 2, c.wrapped)
        sup_last = max(sup_last, dev)
        if dev > tolerance:
            beyond += h
        kx = xi_anchor(cfg)
        if kx is not None:
            ref = center_of_mass(p, make_omega(p, kx), anchor=kx)
            sup_xi = max(sup_xi, circle_distance(ref.wrapped, c.wrapped))
    return MassDeviation(sup_last, beyond / total if total > 0 else 0.0, tolerance,
                         sup_xi, off, count)


TIMESERIES_COLUMNS = ("t", "state_tag", "center_of_mass_wrapped", "center_of_mass_unwrapped",
                      "in_omega0", "in_xi")


def timeseries_rows(log: EventLog, every: int = 1) -> list[tuple]:
    p = log.params
    picked = [(t, cfg) for j, (t, cfg) in enumerate(log.states()) if j % every == 0]
    wrapped = [center_of_mass(p, cfg).wrapped for _, cfg in picked]
    return [(t, str(recognize(p, cfg)), w, u, int(in_omega0(cfg)), int(xi_membership(p, cfg)))
            for (t, cfg), w, u in zip(picked, wrapped, unwrap_series(wrapped))]


def timeseries_csv(log: EventLog, every: int = 1) -> str:
    buf = io.StringIO()
    buf.write(",".join(TIMESERIES_COLUMNS) + "\n")
    for t, tag, w, u, o, x in timeseries_rows(log, every):
        buf.write(f"{t!r},{tag},{w!r},{u!r},{o},{x}\n")
    return buf.getvalue()
