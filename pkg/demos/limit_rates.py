"""Where the jump rates between segregated states come from.

An excursion from omega_0 either falls back or, rarely, lines up one block
against the next and escapes.  The escape then follows a simple absorbing
chain whose absorption probabilities set the long-time rates.  This script
compares three numbers for (3,3,3): the limit rates from that chain, the exact
trace rates at finite beta from the full generator, and a Monte Carlo estimate.
"""
import math

from abcring import ModelParams
from abcring.estimators import estimate_trace_rates
from abcring.exact import trace_rates_exact
from abcring.ideal_chain import absorption_table, limit_rates
from abcring.kmc import run_transitions
from abcring.ring import Species

params = ModelParams(3, 3, 3, beta=4.0)
table = absorption_table(params, Species.A, exact=True)
print("absorption probabilities from the two starting positions (exact):")
for i in (1, 2):
    print(f"  i={i}:", [str(table.prob(i, k)) for k in table.ks])

limit = limit_rates(params, exact=True)
exact = trace_rates_exact(params, params.beta)
samples = run_transitions(params, 0, 4000, seed=3)
est = estimate_trace_rates(samples, params)
scale = math.exp(params.M * params.beta)

print(f"\n{'k':>3} {'limit':>10} {'exact, beta=4':>14} {'simulated':>18}")
for k in range(1, params.N + 1):
    e = est[k]
    sim = f"{e.rate * scale:.4f}" + (f" +- {e.half_width * scale:.4f}" if e.sufficient else "")
    print(f"{k:>3} {float(limit[k]):>10.4f} {exact[k] * scale:>14.4f} {sim:>18}")
