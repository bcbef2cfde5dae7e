"""Phase portrait of the representative organization with eight sample orbits.

Starts are spread over the first quadrant so that defeated orbits and both
kinds of surviving orbits appear.

    python scripts/phase_portrait.py --out out/portrait.svg
"""

import argparse
from pathlib import Path

from orgdyn import OrgParams, OrgState, SimOptions, analyze, fixed_point, sample_orbits
from orgdyn.io import PortraitSpec, render_portrait

# (L, F): three below the sink line, three p-type, two r-type
STARTS = [(0.5, 30), (4, 8), (5, 12), (0.5, 50), (1.5, 40), (3, 40), (8, 10), (9, 3)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="out/portrait.svg")
    ap.add_argument("--iso", action="store_true", help="add iso-strength lines")
    args = ap.parse_args()

    params = OrgParams.uniform(p=0.1, r=0.25, m=10, b=2, k=5, d=0.3)
    fp = fixed_point(params)
    starts = [OrgState(L, F) for L, F in STARTS]
    trajs = sample_orbits(params, starts, SimOptions(t_max=30))
    layers = {"arrows", "sink", "trend", "orbits"} | ({"isostrength"} if args.iso else set())
    spec = PortraitSpec(bounds=(0, 4 * fp.L_star, 0, 2.5 * fp.F_star), layers=frozenset(layers))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(render_portrait(analyze(params), trajs, spec))
    for s, t in zip(starts, trajs):
        print(f"L0={s.L:8.4f} F0={s.F:8.4f} {t.classification.kind.value:9s} {t.outcome.value}")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
