"""Strength-maximizing strikes versus strikes aimed below the sink line.

Part one prints the quadratic-cost tangency solution.  Part two searches
organizations with promotion much faster than recruitment for a budget where
the strength-maximizing strike leaves the organization above the sink line
while another strike of the same cost defeats it.

    python scripts/allocation.py --seed 0
"""

import argparse

import numpy as np

from orgdyn import OrgParams, OrgState, Regime, critical_desertion, eigen_coords, fixed_point, regime
from orgdyn.policy import CostModel, compare_strategies, tangency_allocation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tries", type=int, default=5000)
    args = ap.parse_args()

    res = tangency_allocation(CostModel(1, 1, 2, 100), m=2)
    print(f"tangency (sigma=2, c1=c2=1, B=100, m=2): l = {res.l:.4f}, f = {res.f:.4f}, "
          f"delta_S = {res.delta_S:.4f}")

    rng = np.random.default_rng(args.seed)
    for _ in range(args.tries):
        r = rng.uniform(0.05, 0.2)
        p = r * rng.uniform(3, 10)
        m = rng.uniform(1.5, 20)
        params = OrgParams.uniform(p, r, m, rng.uniform(0.1, 5), rng.uniform(0.1, 10),
                                   rng.uniform(0, 0.9 * critical_desertion(p, r, m)))
        if regime(params) is not Regime.SADDLE or fixed_point(params).negative:
            continue
        fp = fixed_point(params)
        state = OrgState(fp.L_star * rng.uniform(0.2, 3), fp.F_star * rng.uniform(0.2, 3))
        if eigen_coords(params, state).d1 <= 0:
            continue
        cost = CostModel(1, 1, 2, rng.uniform(0.3, 1) * (state.L ** 2 + state.F ** 2))
        cmp = compare_strategies(params, state, cost)
        if cmp.tangency_suboptimal:
            t, f = cmp.tangency, cmp.feasible
            print("\nstrength maximization falls short:")
            print("  params: " + ", ".join(f"{k}={v:.4g}" for k, v in params.as_dict().items()))
            print(f"  state: L = {state.L:.4g}, F = {state.F:.4g}; budget B = {cost.B:.4g}")
            print(f"  tangency strike  l={t.l:.4g} f={t.f:.4g} delta_S={t.delta_S:.4g} "
                  f"-> d1 = {t.post_classification.coords.d1:+.4g}")
            print(f"  sink-line strike l={f.l:.4g} f={f.f:.4g} delta_S={f.delta_S:.4g} "
                  f"-> d1 = {f.post_classification.coords.d1:+.4g}")
            return
    print("no example found; raise --tries")


if __name__ == "__main__":
    main()
