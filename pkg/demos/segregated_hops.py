"""Watch a small ring at low temperature hop between its segregated states.

Runs the dynamics on (3,3,3) at beta = 4, then looks at the same trajectory
three ways: the raw event count, the trace on the segregated states, and the
center of mass of the A particles.
"""
import numpy as np

from abcring import ModelParams, make_omega
from abcring.kmc import MaxEvents, simulate
from abcring.observables import center_of_mass, occupation_outside, trace, unwrap_series
from abcring.ring import in_omega0, omega_anchor

params = ModelParams(3, 3, 3, beta=4.0)
res = simulate(params, make_omega(params, 0), MaxEvents(200_000), seed=1)
print(f"{res.events} swaps over time {res.elapsed:.3g}")

# almost all of the time is spent in one of the nine segregated states
out = occupation_outside(res.log, in_omega0)
print(f"fraction of time away from a segregated state: {out:.4f}")

tp = trace(res.log, in_omega0)
anchors = [omega_anchor(s) for s in tp.states]
print(f"the trace visits {len(anchors)} segregated states; first few anchors: {anchors[:12]}")
jumps = np.diff(anchors)
jumps = (jumps + params.N) % params.ring_size - params.N
sizes, counts = np.unique(jumps, return_counts=True)
print("jump sizes and how often they occur:", dict(zip(sizes.tolist(), counts.tolist())))

# the center of mass follows the anchor; it reads 0 while the ring is far from every segregated state
every = 2000
series = [center_of_mass(params, c).wrapped for j, (_, c) in enumerate(res.log.states()) if j % every == 0]
walk = unwrap_series(series)
print(f"center of mass, unwrapped, sampled every {every} swaps:")
print("  " + " ".join(f"{x:+.2f}" for x in walk[:20]))
