"""Continuous-time simulation of the ABC dynamics.

Randomness comes from numpy's PCG64.  Every run owns two independent streams
spawned from its seed: one for the edge choices and one for the holding times.
Keeping them apart means ``embedded_mode`` (expected holding times instead of
sampled ones) walks through exactly the same jump sequence as ``simulate`` for
a given seed.

Replica ``i`` of a batch with master seed ``s`` uses
``SeedSequence(s, spawn_key=(i,))``, so results do not depend on how replicas
are spread over threads.
"""
from __future__ import annotations

import io
import json
import math
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from . import _kernel as K
from .families import ConfigId, Zeta, recognize, zeta_table
from .ring import EdgeClass, ModelParams, RingConfig, make_omega

LOG_FORMAT_VERSION = 1
_MAGIC = b"ABCLOG\x00\x01"


def replica_seed(master: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master), spawn_key=(int(index),))


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(int(seed))


def _seed_value(seed) -> int:
    ss = _as_seedseq(seed)
    return int(ss.generate_state(2, np.uint32).view(np.uint64)[0])


# ----------------------------------------------------------------------------
# stop conditions


class StopCondition:
    def __or__(self, other: "StopCondition") -> "AnyOf":
        return AnyOf(tuple(_flatten(self)) + tuple(_flatten(other)))


def _flatten(c: StopCondition):
    return c.parts if isinstance(c, AnyOf) else (c,)


@dataclass(frozen=True)
class MaxTime(StopCondition):
    t: float


@dataclass(frozen=True)
class MaxEvents(StopCondition):
    n: int


@dataclass(frozen=True)
class HitSet(StopCondition):
    """Stop at ``H = inf{t >= 0 : state in set}`` (immediately if the start is inside)."""
    member: object


@dataclass(frozen=True)
class FirstReturn(StopCondition):
    """Stop at the first entry into the set after at least one jump."""
    member: object


@dataclass(frozen=True)
class AnyOf(StopCondition):
    parts: tuple


class SegregatedSet:
    """The segregated states, optionally without ``omega_k`` for one ``k``."""

    def __init__(self, params: ModelParams, exclude: int | None = None):
        self.params = params
        self.exclude = exclude

    def __call__(self, config: RingConfig) -> bool:
        from .ring import omega_anchor
        k = omega_anchor(config)
        return k is not None and k != self.exclude


class TableSet:
    """A set given by a boolean table over base-3 configuration codes (tiny rings)."""

    def __init__(self, params: ModelParams, table: np.ndarray):
        self.params = params
        self.table = np.ascontiguousarray(table, dtype=np.uint8)

    def __call__(self, config: RingConfig) -> bool:
        return bool(self.table[config_code(config)])


def config_code(config: RingConfig) -> int:
    weights = 3 ** np.arange(config.params.ring_size, dtype=np.int64)
    return int(config.sites.astype(np.int64) @ weights)


def _member(pred, config: RingConfig) -> bool:
    return bool(pred(config))


# ----------------------------------------------------------------------------
# event log


@dataclass
class EventLog:
    """A recorded trajectory: event times, swapped edges (as ring indices) and the
    class each swapped edge carries after the swap."""

    params: ModelParams
    seed: int
    initial: RingConfig
    times: np.ndarray
    edges: np.ndarray
    classes: np.ndarray
    elapsed: float = 0.0
    snapshots: dict = field(default_factory=dict)

    @property
    def initial_id(self) -> ConfigId:
        return recognize(self.params, self.initial)

    def __len__(self) -> int:
        return int(self.times.size)

    def states(self) -> Iterator[tuple[float, RingConfig]]:
        """Yield ``(entry time, configuration)`` for the start and after every event."""
        p = self.params
        L, n = p.ring_size, p.N
        arr = self.initial.sites.copy()
        yield 0.0, RingConfig._trusted(p, arr.copy())
        for t, e in zip(self.times, self.edges):
            a = int(e) + n
            b = (a + 1) % L
            arr[a], arr[b] = arr[b], arr[a]
            yield float(t), RingConfig._trusted(p, arr.copy())

    def final(self) -> RingConfig:
        last = self.initial
        for _, c in self.states():
            last = c
        return last

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    def to_bytes(self) -> bytes:
        header = {
            "format_version": LOG_FORMAT_VERSION,
            "params": {"N_A": self.params.n_a, "N_B": self.params.n_b,
                       "N_C": self.params.n_c, "beta": self.params.beta},
            "initial": self.initial.render(),
            "initial_id": str(self.initial_id),
            "elapsed": self.elapsed,
            "n_events": len(self),
        }
        hb = json.dumps(header, sort_keys=True).encode()
        out = io.BytesIO()
        out.write(_MAGIC)
        out.write(struct.pack("<I", len(hb)))
        out.write(hb)
        out.write(struct.pack("<Q", self.seed & 0xFFFFFFFFFFFFFFFF))
        n = self.params.N
        for t, e, c in zip(self.times.tolist(), self.edges.tolist(), self.classes.tolist()):
            out.write(_varint(e + n))
            out.write(struct.pack("<dB", t, c))
        return out.getvalue()

    @classmethod
    def load(cls, path) -> "EventLog":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    @classmethod
    def from_bytes(cls, data: bytes) -> "EventLog":
        if data[:8] != _MAGIC:
            raise ValueError("not an event log")
        (hlen,) = struct.unpack_from("<I", data, 8)
        header = json.loads(data[12:12 + hlen])
        if header["format_version"] != LOG_FORMAT_VERSION:
            raise ValueError(f"unsupported log format {header['format_version']}")
        pp = header["params"]
        params = ModelParams(pp["N_A"], pp["N_B"], pp["N_C"], pp["beta"])
        pos = 12 + hlen
        (seed,) = struct.unpack_from("<Q", data, pos)
        pos += 8
        count = header["n_events"]
        times = np.empty(count)
        edges = np.empty(count, dtype=np.int64)
        classes = np.empty(count, dtype=np.int8)
        for j in range(count):
            v, pos = _read_varint(data, pos)
            t, c = struct.unpack_from("<dB", data, pos)
            pos += 9
            times[j], edges[j], classes[j] = t, v - params.N, c
        return cls(params, seed, RingConfig.parse(params, header["initial"]),
                   times, edges, classes, elapsed=header["elapsed"])


def _varint(v: int) -> bytes:
    out = bytearray()
    while True:
        b = v & 0x7F
        v >>= 7
        if v:
            out.append(b | 0x80)
        else:
            out.append(b)
            return bytes(out)


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    shift = value = 0
    while True:
        b = data[pos]
        pos += 1
        value |= (b & 0x7F) << shift
        if not b & 0x80:
            return value, pos
        shift += 7


# ----------------------------------------------------------------------------
# simulation state


class SimState:
    """Mutable state of one trajectory: ring, edge lists, clock and random streams."""

    def __init__(self, params: ModelParams, init: RingConfig, seed, *, embedded: bool = False,
                 chunk: int = 1 << 14):
        if init.params.counts != params.counts:
            raise ValueError("initial configuration does not match the parameters")
        self.params = params
        self.q = math.exp(-params.beta)
        self.embedded = embedded
        L = params.ring_size
        self.sites = init.sites.copy()
        self.eclass = np.zeros(L, dtype=np.int8)
        self.red = np.zeros(L, dtype=np.int64)
        self.red_pos = np.zeros(L, dtype=np.int64)
        self.blue = np.zeros(L, dtype=np.int64)
        self.blue_pos = np.zeros(L, dtype=np.int64)
        self.n_red, self.n_blue = K.build_lists(self.sites, self.eclass, self.red, self.red_pos,
                                                self.blue, self.blue_pos)
        if self.n_red + self.n_blue == 0:
            raise RuntimeError("no active edge: the dynamics cannot move")
        self.clock = 0.0
        self.comp = 0.0
        self.events = 0
        ss = _as_seedseq(seed)
        self.seed = _seed_value(ss)
        jump_ss, hold_ss = ss.spawn(2)
        self._jump = np.random.Generator(np.random.PCG64(jump_ss))
        self._hold = np.random.Generator(np.random.PCG64(hold_ss))
        self.chunk = int(chunk)
        self.uni = self._jump.random(self.chunk)
        self.u_idx = 0
        self.expo = np.empty(0) if embedded else self._hold.standard_exponential(self.chunk)
        self.e_idx = 0

    @property
    def config(self) -> RingConfig:
        return RingConfig._trusted(self.params, self.sites.copy())

    @property
    def total_rate(self) -> float:
        return self.n_blue + self.q * self.n_red

    def check_edges(self) -> bool:
        """Compare the incremental edge lists with a full recomputation."""
        L = self.params.ring_size
        cls = np.array([K.classify(self.sites[e], self.sites[(e + 1) % L]) for e in range(L)])
        reds = set(self.red[:self.n_red].tolist())
        blues = set(self.blue[:self.n_blue].tolist())
        return (np.array_equal(cls, self.eclass)
                and reds == set(np.flatnonzero(cls == K.RED).tolist())
                and blues == set(np.flatnonzero(cls == K.BLUE).tolist()))

    def refill(self, status: int) -> None:
        if status == K.NEED_UNIFORM:
            self.uni = self._jump.random(self.chunk)
            self.u_idx = 0
        else:
            self.expo = self._hold.standard_exponential(self.chunk)
            self.e_idx = 0


_EMPTY_F = np.empty(0)
_EMPTY_I = np.empty(0, dtype=np.int64)
_EMPTY_B = np.empty(0, dtype=np.int8)
_EMPTY_U = np.empty(0, dtype=np.uint8)


class _Runner:
    """Drives the kernel for one SimState, absorbing refills and log flushes."""

    def __init__(self, state: SimState, *, table: np.ndarray | None = None,
                 time_by_code: np.ndarray | None = None, log_capacity: int = 0):
        self.s = state
        p = state.params
        self.table = _EMPTY_U if table is None else np.ascontiguousarray(table, dtype=np.uint8)
        self.pow3 = 3 ** np.arange(p.ring_size, dtype=np.int64) if self.table.size else _EMPTY_I
        self.code = int(state.sites.astype(np.int64) @ self.pow3) if self.table.size else 0
        self.hist = _EMPTY_F if time_by_code is None else time_by_code
        self.occ = np.zeros(2)
        self.log_cap = log_capacity
        self._new_log_buffers()
        self.times, self.edges, self.classes = [], [], []
        self.depth = 0
        self.reached = False
        self.visits = 0
        self.anchor = -1

    def _new_log_buffers(self):
        if self.log_cap:
            self.log_t = np.empty(self.log_cap)
            self.log_e = np.empty(self.log_cap, dtype=np.int64)
            self.log_c = np.empty(self.log_cap, dtype=np.int8)
        else:
            self.log_t, self.log_e, self.log_c = _EMPTY_F, _EMPTY_I, _EMPTY_B
        self.log_n = 0

    def _flush(self):
        if self.log_n:
            n = self.s.params.N
            self.times.append(self.log_t[:self.log_n].copy())
            self.edges.append(self.log_e[:self.log_n] - n)
            self.classes.append(self.log_c[:self.log_n].copy())
        self.log_n = 0

    def run(self, *, t_max=math.inf, max_events=2 ** 62, stop_omega=False, exclude=-1,
            track_depth=False, depth_target=0, stop_table=False) -> int:
        s = self.s
        while True:
            out = K.advance(s.sites, s.eclass, s.red, s.red_pos, s.blue, s.blue_pos,
                            s.n_red, s.n_blue, s.q, s.embedded, s.clock, s.comp, float(t_max),
                            s.events, int(max_events), s.uni, s.u_idx, s.expo, s.e_idx,
                            stop_omega, int(exclude), track_depth, int(depth_target),
                            self.depth, self.reached, self.visits,
                            self.table, self.pow3, self.code, stop_table, self.hist,
                            self.log_t, self.log_e, self.log_c, self.log_n, self.occ)
            (status, s.n_red, s.n_blue, s.clock, s.comp, s.events, s.u_idx, s.e_idx,
             self.depth, self.reached, self.visits, self.code, self.log_n, self.anchor) = out
            if status in (K.NEED_UNIFORM, K.NEED_EXPONENTIAL):
                s.refill(status)
                continue
            if status == K.LOG_FULL:
                self._flush()
                continue
            return status

    def event_log(self, initial: RingConfig) -> EventLog:
        self._flush()
        cat = (lambda xs, dt: np.concatenate(xs) if xs else np.empty(0, dtype=dt))
        return EventLog(self.s.params, self.s.seed, initial, cat(self.times, float),
                        cat(self.edges, np.int64), cat(self.classes, np.int8),
                        elapsed=self.s.clock)


@dataclass
class SimResult:
    final: RingConfig
    elapsed: float
    events: int
    log: EventLog | None
    time_outside_omega0: float = 0.0
    time_outside_table: float = 0.0
    stopped_by: str = ""

    def __iter__(self):
        return iter((self.final, self.elapsed, self.events, self.log))


def _split_stop(stop: StopCondition):
    t_max, n_max, sets = math.inf, 2 ** 62, []
    for part in _flatten(stop):
        if isinstance(part, MaxTime):
            t_max = min(t_max, float(part.t))
        elif isinstance(part, MaxEvents):
            n_max = min(n_max, int(part.n))
        elif isinstance(part, (HitSet, FirstReturn)):
            sets.append(part)
        else:
            raise TypeError(f"unknown stop condition {part!r}")
    if not sets and math.isinf(t_max) and n_max >= 2 ** 62:
        raise ValueError("stop condition can never fire")
    return t_max, n_max, sets


def simulate(params: ModelParams, init: RingConfig, stop: StopCondition, seed, *,
             record: bool = True, embedded: bool = False, table: np.ndarray | None = None,
             time_by_code: np.ndarray | None = None, log_capacity: int = 1 << 16) -> SimResult:
    """Run the dynamics from ``init`` until ``stop`` fires.

    ``table`` (a 0/1 array over base-3 codes, tiny rings only) switches on the
    accumulation of time spent outside that set; time outside the segregated
    states is always accumulated.  ``time_by_code`` receives the holding time of
    every visited code.
    """
    t_max, n_max, sets = _split_stop(stop)
    state = SimState(params, init, seed, embedded=embedded)
    for part in sets:
        if isinstance(part, HitSet) and _member(part.member, init):
            log = EventLog(params, state.seed, init, np.empty(0), np.empty(0, np.int64),
                           np.empty(0, np.int8)) if record else None
            return SimResult(init, 0.0, 0, log, stopped_by="hit")
    kernel_table = table
    stop_omega, exclude, stop_table, slow = False, -1, False, []
    for part in sets:
        m = part.member
        if isinstance(m, SegregatedSet) and not stop_omega:
            stop_omega = True
            exclude = -1 if m.exclude is None else params.wrap(m.exclude) + params.N
        elif isinstance(m, TableSet) and not stop_table and (table is None or table is m.table):
            kernel_table, stop_table = m.table, True
        else:
            slow.append(m)
    if time_by_code is not None and kernel_table is None:
        kernel_table = np.ones(3 ** params.ring_size, dtype=np.uint8)
    runner = _Runner(state, table=kernel_table, time_by_code=time_by_code,
                     log_capacity=log_capacity if record else 0)
    reason = ""
    while True:
        budget = n_max if not slow else min(n_max, state.events + 1)
        status = runner.run(t_max=t_max, max_events=budget, stop_omega=stop_omega,
                            exclude=exclude, stop_table=stop_table)
        if status == K.MAX_TIME:
            reason = "time"
            break
        if status in (K.HIT_OMEGA, K.HIT_TABLE):
            reason = "hit"
            break
        if state.events >= n_max:
            reason = "events"
            break
        if slow and any(_member(m, state.config) for m in slow):
            reason = "hit"
            break
    log = runner.event_log(init) if record else None
    return SimResult(state.config, state.clock, state.events, log,
                     float(runner.occ[0]), float(runner.occ[1]), reason)


def embedded_mode(params: ModelParams, init: RingConfig, stop: StopCondition, seed, **kw) -> SimResult:
    """As ``simulate`` but each holding time is replaced by its mean ``1/total_rate``."""
    return simulate(params, init, stop, seed, embedded=True, **kw)


# ----------------------------------------------------------------------------
# transitions between segregated states


@dataclass
class TransitionSample:
    sample_id: int
    start_k: int
    displacement: int | None
    time: float
    events: int
    meeting: tuple | None
    meetings: list
    deep_excursions: int
    excursions: int
    censored: bool

    @property
    def meeting_id(self) -> ConfigId | None:
        if self.meeting is None:
            return None
        return Zeta(self.start_k, *self.meeting)


def _one_transition(params: ModelParams, start_k: int, seed_seq, sample_id: int,
                    event_cap: int, embedded: bool) -> TransitionSample:
    init = make_omega(params, start_k)
    state = SimState(params, init, seed_seq, embedded=embedded, chunk=1 << 13)
    runner = _Runner(state)
    zetas = zeta_table(params, params.wrap(start_k))
    exclude = params.wrap(start_k) + params.N
    meetings = []
    last = None
    deep = 0
    while True:
        status = runner.run(max_events=event_cap, exclude=exclude, track_depth=True,
                            depth_target=params.M)
        if status == K.HIT_DEPTH:
            deep += 1
            hit = zetas.get(state.sites.tobytes())
            last = None if hit is None else (hit[0], hit[1])
            if last is not None:
                meetings.append(last)
            continue
        break
    if status == K.HIT_OMEGA:
        k_new = runner.anchor - params.N
        disp = params.wrap(k_new - start_k)
        return TransitionSample(sample_id, start_k, disp, state.clock, state.events, last,
                                meetings, deep, runner.visits + 1, False)
    return TransitionSample(sample_id, start_k, None, state.clock, state.events, last,
                            meetings, deep, runner.visits + 1, True)


def run_transitions(params: ModelParams, start_k: int, n_samples: int, seed: int, *,
                    event_cap: int = 10 ** 9, threads: int = 1,
                    embedded: bool = False) -> list[TransitionSample]:
    """Sample ``n_samples`` independent transitions out of ``omega_{start_k}``.

    Each sample runs until the first visit to a segregated state other than the
    start.  Along the way every excursion that reaches red depth ``M`` is
    inspected at that moment; when the configuration is ``zeta(start_k, a, i)``
    the pair ``(a, i)`` is appended to ``meetings``.  ``meeting`` is the value
    for the final (successful) excursion.
    """
    params.require_metastable()
    if params.N * math.exp(-params.beta) >= 0.5:
        warnings.warn("N*exp(-beta) >= 0.5: far from the low-temperature regime", stacklevel=2)
    job = lambda i: _one_transition(params, start_k, replica_seed(seed, i), i, event_cap, embedded)
    if threads <= 1:
        return [job(i) for i in range(n_samples)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(n_samples)))


TRANSITION_COLUMNS = ("sample_id", "displacement", "time", "events", "meeting_alpha",
                      "meeting_i", "censored")


def transitions_csv(samples: list[TransitionSample]) -> str:
    lines = [",".join(TRANSITION_COLUMNS)]
    for s in samples:
        alpha, i = ("", "") if s.meeting is None else (s.meeting[0].name, str(s.meeting[1]))
        disp = "" if s.displacement is None else str(s.displacement)
        lines.append(f"{s.sample_id},{disp},{s.time!r},{s.events},{alpha},{i},{int(s.censored)}")
    return "\n".join(lines) + "\n"
