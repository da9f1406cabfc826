"""A smaller A block makes the segregated shape drift.

With block sizes l < m for A and B the coarse walk has a mean displacement
per unit time.  The closed form is checked against the elimination oracle and
its size is compared with 3^-m, then a short coarse-walk run shows the drift.
"""
from abcring import ModelParams
from abcring.estimators import rw_simulate
from abcring.ideal_chain import limit_rates
from abcring.velocity import velocity, velocity_oracle

print("  l   m   v(l, m)       v * 3^m   matches oracle")
for l, m in [(3, 3), (3, 4), (4, 6), (8, 10), (10, 12), (12, 12)]:
    v = velocity(l, m)
    print(f"{l:>3} {m:>3}   {float(v):+.3e}   {float(v) * 3 ** m:+8.4f}   {v == velocity_oracle(l, m)}")

params = ModelParams(3, 4, 22)
rep = rw_simulate(limit_rates(params, exact=False), params, horizon=100.0, replicas=10_000, seed=8)
print(f"\ncoarse walk on {params.counts}: drift {rep.mu_ballistic:+.5f} +- "
      f"{rep.mu_ballistic_half_width:.5f} per N exp(M beta) time, v(3,4) = {float(velocity(3, 4)):+.5f}")
