"""Statistics on simulated transitions and on the coarse random walk.

Rates of the trace on the segregated states are estimated by counts over total
holding time, pooled over starting anchors (the dynamics is translation
invariant).  The coarse walk is sampled exactly: over a time ``T`` the number
of jumps of each size ``k`` is Poisson with mean ``r(k) T``, independently in
``k``, so a replica costs one Poisson draw per jump size.
"""
from __future__ import annotations

import io
import json
import math
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np
from scipy import stats

from .ideal_chain import RateVector, meeting_distribution
from .kmc import TransitionSample
from .ring import ModelParams

RATE_CONFIDENCE = 0.95
SCALING_CONFIDENCE = 0.99
MIN_COUNT = 5


def _z(level: float) -> float:
    return float(stats.norm.ppf(0.5 + level / 2))


@dataclass(frozen=True)
class RateEntry:
    k: int
    count: int
    rate: float
    half_width: float | None

    @property
    def sufficient(self) -> bool:
        return self.half_width is not None

    @property
    def interval(self) -> tuple[float, float] | None:
        if self.half_width is None:
            return None
        return (max(self.rate - self.half_width, 0.0), self.rate + self.half_width)


@dataclass(frozen=True)
class RateEstimate:
    """Empirical jump rates ``k -> count / total time`` with Wald intervals.

    Entries with fewer than ``MIN_COUNT`` jumps carry no interval.
    """

    params: ModelParams
    total_time: float
    n_samples: int
    n_censored: int
    entries: dict

    def __getitem__(self, k: int) -> RateEntry:
        k = self.params.wrap(k)
        return self.entries.get(k, RateEntry(k, 0, 0.0, None))

    def scale(self) -> float:
        """Factor ``e^{M beta}`` turning rates into the units of the limit rates."""
        return math.exp(self.params.M * self.params.beta)

    def to_csv(self) -> str:
        s = self.scale()
        buf = io.StringIO()
        buf.write("k,count,rate,ci_low,ci_high,scaled_rate,scaled_half_width,status\n")
        for k in sorted(self.entries):
            e = self.entries[k]
            if e.sufficient:
                lo, hi = e.interval
                buf.write(f"{k},{e.count},{e.rate!r},{lo!r},{hi!r},{e.rate * s!r},"
                          f"{e.half_width * s!r},ok\n")
            else:
                buf.write(f"{k},{e.count},{e.rate!r},,,{e.rate * s!r},,insufficient\n")
        return buf.getvalue()


def estimate_trace_rates(samples: list[TransitionSample], params: ModelParams,
                         confidence: float = RATE_CONFIDENCE) -> RateEstimate:
    """Rates out of a segregated state from transition samples.

    Censored samples add their time but no jump.
    """
    done = [s for s in samples if not s.censored]
    if not done:
        raise ValueError("every sample is censored")
    total = math.fsum(s.time for s in samples)
    counts = Counter(s.displacement for s in done)
    z = _z(confidence)
    entries = {}
    for k in range(-params.N, params.N + 1):
        if k == 0:
            continue
        c = counts.get(k, 0)
        hw = z * math.sqrt(c) / total if c >= MIN_COUNT else None
        entries[k] = RateEntry(k, c, c / total, hw)
    return RateEstimate(params, total, len(samples), len(samples) - len(done), entries)


def synthetic_transitions(rates: RateVector, n: int, seed: int, time_scale: float = 1.0
                          ) -> list[TransitionSample]:
    """Transitions drawn from known rates (for checking the estimator)."""
    rng = np.random.default_rng(seed)
    ks = rates.ks()
    r = np.array([float(rates[k]) for k in ks])
    lam = r.sum()
    times = rng.exponential(1.0 / lam, n) * time_scale
    jumps = rng.choice(len(ks), size=n, p=r / lam)
    return [TransitionSample(i, 0, ks[j], float(t), 1, None, [], 0, 1, False)
            for i, (t, j) in enumerate(zip(times, jumps))]


@dataclass(frozen=True)
class MeetingHistogram:
    counts: tuple[int, ...]
    frequencies: tuple[float, ...]
    profile: tuple[float, ...]
    chi2: float
    interior_endpoint_ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


def meeting_histogram(samples: list[TransitionSample], M: int, *,
                      all_excursions: bool = True) -> MeetingHistogram:
    """Positions ``i = 0 .. M`` at which excursions first reach red depth ``M``.

    By default every recorded excursion counts.  With ``all_excursions=False``
    only the excursion that produced the transition is used; that one is
    conditioned on escaping and its profile is different.
    """
    c = Counter()
    for s in samples:
        if all_excursions:
            c.update(i for _, i in s.meetings)
        elif s.meeting is not None:
            c[s.meeting[1]] += 1
    counts = tuple(c.get(i, 0) for i in range(M + 1))
    total = sum(counts)
    freq = tuple(x / total if total else 0.0 for x in counts)
    profile = tuple(float(x) for x in meeting_distribution(M).profile)
    chi2 = sum((f - p) ** 2 / p for f, p in zip(freq, profile))
    interior = sum(counts[1:M]) / (M - 1)
    ends = (counts[0] + counts[M]) / 2
    ratio = interior / ends if ends else math.inf
    return MeetingHistogram(counts, freq, profile, chi2, ratio)


# ----------------------------------------------------------------------------
# coarse random walk


@dataclass
class ScalingReport:
    """Drift and variance of ``X(t theta_beta) / N`` per unit ``t`` over replicas.

    ``mu``/``sigma2`` are per ``theta_beta`` time; ``mu_ballistic`` is the drift
    of ``X / N`` per ``N e^{M beta}`` time.  Intervals are symmetric half-widths at
    ``confidence``.  The ``cc*`` entries are the values the empirical ones should
    approach, recomputed from the supplied rates.
    """

    params: dict
    horizon: float
    replicas: int
    seed: int
    confidence: float
    mu: float
    mu_half_width: float
    mu_ballistic: float
    mu_ballistic_half_width: float
    sigma2: float
    sigma2_half_width: float
    cc1_reference: float
    cc2_reference: float
    cc2_ballistic_reference: float
    cc3_tail: dict
    max_jump: float
    max_jump_k: int
    jumps_per_replica: float

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True)


def rw_simulate(rates: RateVector, params: ModelParams, horizon: float, replicas: int, seed: int,
                *, confidence: float = SCALING_CONFIDENCE, chunk: int = 2048) -> ScalingReport:
    """Simulate the coarse walk with jump rates ``r(k) e^{-M beta}`` up to ``horizon * theta_beta``.

    ``beta`` drops out: in units of ``e^{-M beta}`` the horizon is ``horizon * N^2 / (2d)``.
    """
    if horizon <= 0 or replicas < 2:
        raise ValueError("need a positive horizon and at least two replicas")
    n, d = params.N, params.d
    ks = np.array(rates.ks())
    r = np.array([float(rates[k]) for k in ks])
    T = horizon * n * n / (2 * d)
    ss = np.random.SeedSequence(int(seed))
    disp = np.empty(replicas)
    max_k = 0
    jumps = 0
    for start in range(0, replicas, chunk):
        size = min(chunk, replicas - start)
        rng = np.random.Generator(np.random.PCG64(ss.spawn(1)[0]))
        counts = rng.poisson(r * T, size=(size, ks.size))
        disp[start:start + size] = counts @ ks
        used = np.flatnonzero(counts.sum(axis=0))
        if used.size:
            max_k = max(max_k, int(np.abs(ks[used]).max()))
        jumps += int(counts.sum())
    x = disp / n
    z = _z(confidence)
    mean, var = x.mean(), x.var(ddof=1)
    m4 = np.mean((x - mean) ** 4)
    mu = mean / horizon
    mu_hw = z * math.sqrt(var / replicas) / horizon
    ballistic_time = horizon * n / (2 * d)
    sigma2 = var / horizon
    sigma2_hw = z * math.sqrt(max(m4 - var * var, 0.0) / replicas) / horizon
    second = float(sum(k * k * float(rates[k]) for k in ks))
    first = float(sum(k * float(rates[k]) for k in ks))
    tails = {}
    for delta in (0.05, 0.1, 0.25, 0.5):
        mass = float(sum(float(rates[k]) for k in ks if abs(k) > delta * n))
        tails[str(delta)] = mass * n * n / (2 * d)
    return ScalingReport(
        params={"N_A": params.n_a, "N_B": params.n_b, "N_C": params.n_c, "beta": params.beta},
        horizon=horizon, replicas=replicas, seed=int(seed), confidence=confidence,
        mu=float(mu), mu_half_width=float(mu_hw),
        mu_ballistic=float(mean / ballistic_time),
        mu_ballistic_half_width=float(z * math.sqrt(var / replicas) / ballistic_time),
        sigma2=float(sigma2), sigma2_half_width=float(sigma2_hw),
        cc1_reference=second / (2 * d), cc2_reference=first * n / (2 * d),
        cc2_ballistic_reference=first, cc3_tail=tails,
        max_jump=max_k / n, max_jump_k=max_k, jumps_per_replica=jumps / replicas)


def drift_reference(l: int, m: int, N: int) -> Fraction:
    """``(N/2) v(l, m)``: drift of ``X / N`` per ``theta_beta`` time when the smaller block is unique.

    This is the quantity checked; how it should be written in terms of a
    constant tied to the size of the third block is left open.
    """
    from .velocity import velocity
    return Fraction(N, 2) * velocity(l, m)
