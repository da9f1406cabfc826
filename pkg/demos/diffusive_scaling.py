"""Equal blocks: the segregated shape diffuses with unit variance on the theta_beta clock."""
from abcring import ModelParams
from abcring.estimators import rw_simulate
from abcring.ideal_chain import limit_rates

for m in (4, 8, 12):
    # the third block takes up the rest of a ring of size 121 or less
    params = ModelParams(m, m, 8 * m + 1)
    rates = limit_rates(params, exact=False)
    rep = rw_simulate(rates, params, horizon=1.0, replicas=10_000, seed=m)
    print(f"M={m:>2} N={params.N:>3}: variance {rep.sigma2:.3f} +- {rep.sigma2_half_width:.3f} "
          f"(reference {rep.cc1_reference:.4f}), drift {rep.mu:+.4f}, largest jump {rep.max_jump_k} sites")
