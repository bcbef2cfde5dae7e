"""Time evolution of a p-type and an r-type organization, each series rescaled by its maximum.

The p-type start loses foot soldiers at first and recovers through promotion;
the r-type start loses strength and leaders at first and recovers through
recruitment.  Both end up growing.

    python scripts/evolution.py --out-dir out
"""

import argparse
from pathlib import Path

import numpy as np

from orgdyn import OrgParams, OrgState, SimOptions, classify, simulate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="out")
    ap.add_argument("--t-max", type=float, default=20.0)
    args = ap.parse_args()

    params = OrgParams.uniform(p=0.1, r=0.25, m=10, b=2, k=5, d=0.3)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for label, s0 in (("ptype", OrgState(1.0, 60.0)), ("rtype", OrgState(9.0, 3.0))):
        traj = simulate(params, s0, SimOptions(t_max=args.t_max))
        rs = traj.rescaled()
        path = out / f"evolution_{label}.csv"
        np.savetxt(path, np.c_[traj.times, rs["L"], rs["F"], rs["S"]], delimiter=",",
                   header="t,L_rescaled,F_rescaled,S_rescaled", comments="", fmt="%.8g")
        dips = {k: float(traj.times[int(np.argmin(v))]) for k, v in (("L", traj.L), ("F", traj.F), ("S", traj.S))}
        print(f"{label}: {classify(params, s0).kind.value}, outcome {traj.outcome.value}, "
              f"minimum at t = " + ", ".join(f"{k}:{v:.2f}" for k, v in dips.items()) + f" -> {path}")


if __name__ == "__main__":
    main()
