import math

import numpy as np
import pytest

from abcring.exact import enumerate_states, gibbs
from abcring.families import make_xi
from abcring.ideal_chain import limit_rates
from abcring.kmc import (EventLog, FirstReturn, HitSet, MaxEvents, MaxTime, SegregatedSet, SimState,
                         TRANSITION_COLUMNS, _Runner, config_code, embedded_mode, replica_seed,
                         run_transitions, simulate, transitions_csv)
from abcring.neighborhoods import bfs_neighborhood
from abcring.ring import ModelParams, RingConfig, Species, classify_edge, make_omega, omega_anchor

P333 = ModelParams(3, 3, 3, beta=2.0)


def test_first_event_from_omega():
    level1 = {w.key for w in bfs_neighborhood(P333, 0, 1)[1]}
    waits = []
    for seed in range(2000):
        res = simulate(P333, make_omega(P333, 0), MaxEvents(1), seed)
        assert res.final.key in level1
        waits.append(res.elapsed)
    mean = np.mean(waits)
    expected = math.exp(2.0) / 3
    assert abs(mean - expected) < 4 * expected / math.sqrt(2000)


def test_embedded_holding_is_exact():
    res = embedded_mode(P333, make_omega(P333, 0), MaxEvents(1), 5)
    assert res.elapsed == pytest.approx(math.exp(2.0) / 3, rel=1e-15)


@pytest.mark.parametrize("i", [1, 2])
def test_total_rate_at_xi(i):
    p = ModelParams(5, 7, 9, beta=3.0)
    st = SimState(p, make_xi(p, 1, Species.B, i), 0)
    assert st.total_rate == pytest.approx(6 * math.exp(-3.0))


def test_determinism_and_replay(tmp_path):
    a = simulate(P333, make_omega(P333, 0), MaxEvents(10 ** 4), 11)
    b = simulate(P333, make_omega(P333, 0), MaxEvents(10 ** 4), 11)
    assert a.log.to_bytes() == b.log.to_bytes()
    assert a.events == 10 ** 4
    assert a.log.final() == a.final
    path = tmp_path / "run.abclog"
    a.log.save(path)
    back = EventLog.load(path)
    assert back.final() == a.final
    assert np.array_equal(back.times, a.log.times)
    assert back.seed == a.log.seed


def test_log_classes_match_replay():
    res = simulate(P333, make_omega(P333, 0), MaxEvents(2000), 3)
    states = [c for _, c in res.log.states()]
    for j, (e, c) in enumerate(zip(res.log.edges, res.log.classes)):
        assert classify_edge(states[j + 1], int(e)) == c


def test_incremental_edges_match_recomputation():
    p = ModelParams(4, 5, 6, beta=1.0)
    st = SimState(p, make_omega(p, 0), 9, chunk=64)
    runner = _Runner(st)
    for _ in range(50):
        runner.run(max_events=st.events + 97)
        assert st.check_edges()
    assert st.events == 50 * 97


def test_embedded_same_jump_chain():
    a = simulate(P333, make_omega(P333, 0), MaxEvents(5000), 21)
    b = embedded_mode(P333, make_omega(P333, 0), MaxEvents(5000), 21)
    assert np.array_equal(a.log.edges, b.log.edges)
    assert a.elapsed != b.elapsed


def test_stop_conditions():
    w = make_omega(P333, 0)
    res = simulate(P333, w, HitSet(SegregatedSet(P333)), 1)
    assert (res.events, res.elapsed, res.stopped_by) == (0, 0.0, "hit")
    res = simulate(P333, w, FirstReturn(SegregatedSet(P333)), 1)
    assert res.events > 0 and omega_anchor(res.final) is not None
    res = simulate(P333, w, MaxTime(50.0) | MaxEvents(10 ** 9), 1)
    assert res.stopped_by == "time" and res.elapsed == 50.0
    # a plain predicate works too, through the slow path
    res = simulate(P333, w, FirstReturn(lambda c: omega_anchor(c) == 1) | MaxEvents(10 ** 7), 2)
    assert omega_anchor(res.final) == 1


def test_stop_must_be_able_to_fire():
    with pytest.raises(ValueError):
        simulate(P333, make_omega(P333, 0), MaxTime(math.inf), 0)


def test_gibbs_occupation_at_beta_one():
    p = ModelParams(3, 3, 3, beta=1.0)
    hist = np.zeros(3 ** 9)
    simulate(p, make_omega(p, 0), MaxEvents(10 ** 7), 123, record=False, time_by_code=hist)
    arr, _ = enumerate_states(p)
    codes = [config_code(RingConfig._trusted(p, s)) for s in arr]
    emp = hist[codes] / hist.sum()
    tv = 0.5 * np.abs(emp - gibbs(p, 1.0)).sum()
    assert tv <= 0.02


def test_replica_seeds_are_thread_independent():
    p = ModelParams(3, 3, 3, beta=4.0)
    one = run_transitions(p, 0, 40, 77, threads=1)
    many = run_transitions(p, 0, 40, 77, threads=4)
    assert transitions_csv(one) == transitions_csv(many)
    assert replica_seed(77, 3).entropy == 77


@pytest.fixture(scope="module")
def transitions_333():
    p = ModelParams(3, 3, 3, beta=4.0)
    return p, run_transitions(p, 0, 3000, 2024)


def test_transitions_mostly_nearest(transitions_333):
    p, samples = transitions_333
    disp = np.array([s.displacement for s in samples])
    assert np.mean(np.abs(disp) == 1) > 0.75
    # symmetric block sizes: no drift
    assert abs(disp.mean()) < 3 * disp.std() / math.sqrt(disp.size)


def test_transition_time_matches_total_rate(transitions_333):
    p, samples = transitions_333
    total = float(limit_rates(p, exact=True).total)
    mean = np.mean([s.time for s in samples]) * math.exp(-3 * p.beta)
    # finite-beta corrections are a few percent at beta = 4
    assert mean == pytest.approx(1 / total, rel=0.1)


def test_transition_csv(transitions_333):
    _, samples = transitions_333
    lines = transitions_csv(samples[:5]).splitlines()
    assert lines[0] == ",".join(TRANSITION_COLUMNS)
    assert len(lines) == 6


def test_censoring():
    p = ModelParams(3, 3, 3, beta=5.0)
    samples = run_transitions(p, 0, 5, 1, event_cap=10)
    assert all(s.censored and s.displacement is None for s in samples)


def test_warns_at_high_temperature():
    with pytest.warns(UserWarning):
        run_transitions(ModelParams(3, 3, 3, beta=1.0), 0, 1, 0)


def test_event_count_scaling():
    p = ModelParams(3, 3, 3)
    betas = (3.0, 4.0, 5.0)
    means = [np.mean([s.events for s in run_transitions(p.with_beta(b), 0, 400, 5)]) for b in betas]
    ratios = [m / math.exp(2 * b) for m, b in zip(means, betas)]
    assert max(ratios) / min(ratios) <= 4
    slope = np.polyfit(betas, np.log(means), 1)[0]
    assert 1.5 <= slope <= 2.5
