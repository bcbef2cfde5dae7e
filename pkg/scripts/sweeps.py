"""Sink line under changes of each parameter around the representative organization.

Writes one CSV per parameter with the F-intercept and slope of the sink line,
and prints the sign of each sensitivity.  Removals (b, k) shift the line
upward without turning it; promotion and recruitment lower it; desertion
raises it.

    python scripts/sweeps.py --out-dir out
"""

import argparse
from pathlib import Path

import numpy as np

from orgdyn import OrgParams, Regime, critical_desertion, regime, sink_line
from orgdyn.policy import bk_equivalence, sink_sensitivity

RANGES = {
    "b": (0.0, 10.0),
    "k": (0.0, 20.0),
    "p": (0.02, 0.3),
    "r": (0.1, 0.5),
    "d_L": (0.0, 0.6),
    "d_F": (0.0, 0.6),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--steps", type=int, default=41)
    args = ap.parse_args()

    base = OrgParams.uniform(p=0.1, r=0.25, m=10, b=2, k=5, d=0.3)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (lo, hi) in RANGES.items():
        rows = []
        for v in np.linspace(lo, hi, args.steps):
            params = base.with_(**{name: float(v)})
            if regime(params) is Regime.SADDLE:
                line = sink_line(params)
                rows.append((v, line.f_intercept, line.slope))
            else:
                rows.append((v, np.nan, np.nan))
        np.savetxt(out / f"sweep_{name}.csv", np.array(rows), delimiter=",",
                   header="value,intercept,slope", comments="", fmt="%.10g")
        rpt = sink_sensitivity(base, name)
        print(f"{name:4s} d(intercept) = {rpt.intercept_shift:+.4g}  d(slope) = {rpt.slope_change:+.4g}")
    print(f"one unit of b is worth {bk_equivalence(base):.4g} units of k")
    print(f"critical desertion rate: {critical_desertion(base.p, base.r, base.m):.6g}")


if __name__ == "__main__":
    main()
