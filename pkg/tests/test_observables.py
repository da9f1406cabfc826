import math

import numpy as np
import pytest

from abcring.kmc import MaxEvents, SegregatedSet, run_transitions, simulate
from abcring.observables import (NOT_REACHED, TIMESERIES_COLUMNS, center_of_mass, circle_distance,
                                 hitting_times, last_visit, lastmass_deviation, occupation_outside,
                                 steps, timeseries_csv, trace, trace_path, unwrap_series,
                                 wrap_circle)
from abcring.ring import ModelParams, in_omega0, make_omega, omega_anchor, transpose

P333 = ModelParams(3, 3, 3)
EVERYTHING = lambda _: True


def test_trace_drops_outside_time():
    path = [("s1", 2.0), ("x", 0.5), ("s2", 1.0)]
    tp = trace_path(path, lambda s: s.startswith("s"))
    assert list(tp) == [("s1", 2.0), ("s2", 1.0)]
    assert list(trace_path(path, EVERYTHING)) == path


def test_trace_merges_repeats_and_is_idempotent():
    path = [("s1", 1.0), ("x", 0.5), ("s1", 1.5), ("y", 2.0), ("s2", 1.0)]
    member = lambda s: s.startswith("s")
    tp = trace_path(path, member)
    assert list(tp) == [("s1", 2.5), ("s2", 1.0)]
    assert list(trace_path(tp, member)) == list(tp)


def test_trace_must_start_inside():
    with pytest.raises(ValueError):
        trace_path([("x", 1.0)], lambda s: False)


def test_hitting_times_examples():
    inside = lambda s: s == "a"
    assert hitting_times([("a", 4.0)], inside) == (0.0, NOT_REACHED)
    assert hitting_times([("b", 3.7), ("a", 1.0)], inside) == (3.7, 3.7)
    assert hitting_times([("a", 1.0), ("b", 2.0), ("a", 1.0)], inside) == (0.0, 3.0)


@pytest.fixture(scope="module")
def run_333():
    p = P333.with_beta(3.0)
    return simulate(p, make_omega(p, 0), MaxEvents(20000), 8)


def test_trace_of_simulation(run_333):
    tp = trace(run_333.log, in_omega0)
    assert all(h > 0 for h in tp.holding)
    assert all(a != b for a, b in zip(tp.states, tp.states[1:]))
    assert tp.total_time <= run_333.elapsed
    out = occupation_outside(run_333.log, in_omega0)
    assert tp.total_time == pytest.approx((1 - out) * run_333.elapsed, rel=1e-12)


def test_time_conservation(run_333):
    total = math.fsum(h for _, h in steps(run_333.log))
    assert total == pytest.approx(run_333.elapsed, rel=1e-12)
    assert occupation_outside(run_333.log, EVERYTHING) == 0.0


def test_center_of_mass_values():
    assert center_of_mass(P333, make_omega(P333, 0)).wrapped == pytest.approx(0.25)
    p = ModelParams(5, 7, 9)
    base = center_of_mass(p, make_omega(p, 0)).wrapped
    for k in range(-p.N, p.N + 1):
        c = center_of_mass(p, make_omega(p, k))
        assert c.anchor == k
        assert circle_distance(c.wrapped - base, k / p.N) < 1e-12


def test_center_of_mass_off_gamma():
    p = ModelParams(5, 7, 9)
    bad = transpose(transpose(transpose(make_omega(p, 0), 1, 6), 7, -3), -5, 3)
    c = center_of_mass(p, bad)
    assert c.wrapped == 0.0 and not c.in_gamma


def test_wrap_helpers():
    assert wrap_circle(1.0) == -1.0
    assert wrap_circle(-1.25) == pytest.approx(0.75)
    assert circle_distance(0.95, -0.95) == pytest.approx(0.1)
    u = unwrap_series([0.9, -0.95, -0.8, 0.9])
    assert u == pytest.approx([0.9, 1.05, 1.2, 0.9])
    for w, x in zip([0.9, -0.95, -0.8, 0.9], u):
        assert wrap_circle(x) == pytest.approx(w)


def test_center_of_mass_steps_are_small():
    p = ModelParams(5, 7, 9, beta=3.0)
    res = simulate(p, make_omega(p, 0), MaxEvents(20000), 4)
    vals = [center_of_mass(p, c) for _, c in res.log.states()]
    wrapped = [v.wrapped for v in vals if v.in_gamma]
    u = unwrap_series(wrapped)
    # one particle moves one site per event; a change of anchor across the seam adds 1/N
    assert max(abs(b - a) for a, b in zip(u, u[1:])) <= 2 / p.N + 1e-12


def test_last_visit_without_leaving():
    path = [(make_omega(P333, k), 1.0) for k in (0, 1, 2, 1)]
    lv = last_visit(path, in_omega0)
    assert lv.values.tolist() == [0, 1, 2, 1]
    assert lv.times.tolist() == [0.0, 1.0, 2.0, 3.0]


def test_last_visit_constant_over_round_trip():
    w = make_omega(P333, 0)
    away = transpose(w, 2, 3)
    lv = last_visit([(w, 1.0), (away, 2.0), (w, 1.0)], in_omega0)
    assert lv.values.tolist() == [0]
    assert lv.at(2.5) == 0


def test_last_visit_changes_only_at_entries(run_333):
    lv = last_visit(run_333.log, in_omega0)
    entries = set()
    for t, c in run_333.log.states():
        if in_omega0(c):
            entries.add(t)
    assert set(lv.times.tolist()) <= entries


def test_rare_deep_excursions():
    p = ModelParams(3, 3, 3, beta=4.0)
    samples = run_transitions(p, 0, 300, 17)
    deep = sum(s.deep_excursions for s in samples)
    total = sum(s.excursions for s in samples)
    assert deep / total <= (4 * math.exp(-4.0)) ** 2


def test_lastmass_decomposition():
    p = ModelParams(3, 3, 3, beta=5.0)
    res = simulate(p, make_omega(p, 0), MaxEvents(4000), 6)
    dev = lastmass_deviation(res.log)
    assert dev.to_xi_anchor <= 1 / p.n_a + 1e-12
    assert dev.time_beyond <= 0.01
    assert dev.samples == 4001


def test_timeseries_csv(run_333):
    text = timeseries_csv(run_333.log, every=500)
    lines = text.splitlines()
    assert lines[0] == ",".join(TIMESERIES_COLUMNS)
    assert len(lines) == 1 + len(range(0, 20001, 500))
    assert lines[1].split(",")[1] == "omega[0]"


def test_segregated_set_predicate():
    assert SegregatedSet(P333)(make_omega(P333, 2))
    assert not SegregatedSet(P333, exclude=2)(make_omega(P333, 2))
    assert omega_anchor(make_omega(P333, -3)) == -3
