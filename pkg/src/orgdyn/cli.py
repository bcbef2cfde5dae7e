"""``orgdyn`` command line: analyze, simulate, portrait, sweep, policy, theorem.

Exit codes: 0 success, 1 unreadable or malformed scenario, 2 invalid values or
options, 3 degenerate analysis, 10 ``theorem`` found a state whose defeat is
not established.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import analysis as an
from . import io as oio
from . import policy as pol
from .model import (
    PARAM_NAMES,
    DegenerateError,
    DomainError,
    InvalidParameterError,
    OrgDynError,
    RegimeError,
)
from .simulate import Method, SimOptions, StepSizeError, sample_orbits, simulate

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INVALID = 2
EXIT_DEGENERATE = 3
EXIT_NOT_DEFEATED = 10


class UsageError(Exception):
    """Bad option value (exit 2)."""


def _warn(msg: str) -> None:
    print(f"orgdyn: warning: {msg}", file=sys.stderr)


def _load(args) -> oio.Scenario:
    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as e:
        raise oio.ScenarioError(f"cannot read {args.scenario}: {e.strerror or e}") from None
    scn = oio.parse_scenario(text)
    if args.set:
        changes = {}
        for item in args.set:
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in PARAM_NAMES + ("d",):
                raise UsageError(f"--set expects KEY=VALUE with KEY in {', '.join(PARAM_NAMES)}, d; got {item!r}")
            try:
                changes[key] = float(value)
            except ValueError:
                raise UsageError(f"--set {key}: not a number: {value!r}") from None
        scn.params = scn.params.with_(**changes)
    return scn


def _emit(args, text: str) -> None:
    if args.output in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _use_color(args) -> bool:
    if os.environ.get("ORGDYN_NO_COLOR"):
        return False
    return args.output in (None, "-") and sys.stdout.isatty()


def _verdicts(scn: oio.Scenario):
    return [(label, an.victory_check(scn.params, s)) for label, s in scn.states.items()]


def cmd_analyze(args) -> int:
    scn = _load(args)
    result = an.analyze(scn.params)
    verdicts = _verdicts(scn) if result.saddle else []
    _emit(args, oio.write_report(result, verdicts, color=_use_color(args)))
    return EXIT_OK


def _sim_options(args, scn) -> SimOptions:
    base = scn.sim
    return SimOptions(
        method=Method(args.method) if args.method else base.method,
        dt=args.dt if args.dt is not None else base.dt,
        t_max=args.t_max if args.t_max is not None else base.t_max,
        sample_every=args.sample_every if args.sample_every is not None else base.sample_every,
    )


def cmd_simulate(args) -> int:
    scn = _load(args)
    if not scn.states:
        raise UsageError("scenario has no [state.NAME] sections")
    opts = _sim_options(args, scn)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for label, state in scn.states.items():
        traj = simulate(scn.params, state, opts)
        path = out_dir / f"{label}.csv"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(oio.write_trajectory_csv(traj))
        print(f"{label}: {traj.outcome.value} -> {path}", file=sys.stderr)
    return EXIT_OK


def _parse_bounds(text: str):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--bounds expects Lmin,Lmax,Fmin,Fmax, got {text!r}") from None
    if len(vals) != 4 or not (vals[1] > vals[0] and vals[3] > vals[2]):
        raise UsageError(f"--bounds expects Lmin<Lmax,Fmin<Fmax, got {text!r}")
    return vals


def _parse_grid(text: str):
    parts = text.lower().split("x")
    try:
        nL, nF = (int(v) for v in parts)
    except ValueError:
        raise UsageError(f"--grid expects NxM, got {text!r}") from None
    if nL < 2 or nF < 2:
        raise UsageError(f"--grid needs at least 2x2, got {text!r}")
    return nL, nF


def _auto_bounds(scn, result) -> tuple:
    Ls = [s.L for s in scn.states.values()]
    Fs = [s.F for s in scn.states.values()]
    if result.fixed_point is not None:
        Ls.append(2.0 * result.fixed_point.L_star)
        Fs.append(2.0 * result.fixed_point.F_star)
    L_hi = max([v for v in Ls if v > 0], default=1.0)
    F_hi = max([v for v in Fs if v > 0], default=1.0)
    return 0.0, L_hi, 0.0, F_hi


def cmd_portrait(args) -> int:
    scn = _load(args)
    result = an.analyze(scn.params)
    bounds = _parse_bounds(args.bounds) if args.bounds else _auto_bounds(scn, result)
    grid = _parse_grid(args.grid)
    layers = set(oio.DEFAULT_LAYERS)
    if args.iso:
        layers.add("isostrength")
    if args.no_arrows:
        layers.discard("arrows")
    if not result.saddle:
        _warn(f"regime is {result.regime.value}: no sink or trend line drawn")
    trajs = sample_orbits(scn.params, list(scn.states.values()), _sim_options(args, scn)) if scn.states else []
    spec = oio.PortraitSpec(bounds=bounds, layers=frozenset(layers), grid=grid)
    _emit(args, oio.render_portrait(result, trajs, spec))
    return EXIT_OK


def cmd_sweep(args) -> int:
    scn = _load(args)
    if args.param not in PARAM_NAMES:
        raise UsageError(f"--param must be one of {', '.join(PARAM_NAMES)}")
    if args.steps < 2:
        raise UsageError(f"--steps must be >= 2, got {args.steps}")
    if not args.to > args.from_:
        raise UsageError(f"--from must be < --to, got {args.from_} >= {args.to}")
    rows = ["value,regime,intercept,slope"]
    for v in np.linspace(args.from_, args.to, args.steps):
        params = scn.params.with_(**{args.param: float(v)})
        reg = an.regime(params)
        if reg is an.Regime.SADDLE:
            line = an.sink_line(params)
            rows.append(f"{v:.12g},{reg.value},{line.f_intercept:.12g},{line.slope:.12g}")
        else:
            rows.append(f"{v:.12g},{reg.value},,")
    _emit(args, "\n".join(rows) + "\n")
    return EXIT_OK


def _g(x: float) -> str:
    return f"{x:.6g}"


def _alloc_line(name: str, a: pol.AllocationResult) -> List[str]:
    post = a.post_state
    kind = a.post_classification.kind.value if a.post_classification else "n/a"
    return [
        f"{name}: l = {_g(a.l)}, f = {_g(a.f)}, delta_S = {_g(a.delta_S)}, cost = {_g(a.cost)}",
        f"  post-strike state: L = {_g(post.L)}, F = {_g(post.F)} -> {kind}"
        + (f" (d1 = {_g(a.post_classification.coords.d1)})" if a.post_classification else ""),
    ]


def cmd_policy(args) -> int:
    scn = _load(args)
    if scn.cost is None:
        raise UsageError("policy needs a [cost] section")
    if len(scn.states) != 1:
        raise UsageError(f"policy needs exactly one state, scenario has {len(scn.states)}")
    (label, state), = scn.states.items()
    params, cost = scn.params, scn.cost
    cmp = pol.compare_strategies(params, state, cost)
    out = [
        f"Budget allocation for state {label} (L = {_g(state.L)}, F = {_g(state.F)})",
        f"Cost model: c1 = {_g(cost.c1)}, c2 = {_g(cost.c2)}, sigma = {_g(cost.sigma)}, B = {_g(cost.B)}",
    ]
    if cmp.already_defeated:
        out.append("Organization is already below the sink line (already defeated).")
    out += _alloc_line("Strength-maximizing strike", cmp.tangency)
    out.append("  under sink line: " + ("yes" if cmp.tangency_defeats else "no"))
    if isinstance(cmp.feasible, pol.Infeasible):
        out += _alloc_line("Sink-line strike (best effort)", cmp.feasible.best)
        out.append(f"  under sink line: no (infeasible, min achievable d1 = {_g(cmp.feasible.min_d1)})")
    else:
        out += _alloc_line("Sink-line strike", cmp.feasible)
        out.append("  under sink line: yes")
    if cmp.tangency_suboptimal:
        out.append("Strength maximization is suboptimal here: it leaves the organization above "
                   "the sink line, while the alternative strike defeats it.")
    elif not cmp.feasible_defeats:
        out.append("Neither strike brings the organization under the sink line with this budget.")
    ratio = pol.bk_equivalence(params)
    out.append(f"b/k equivalence: one unit of b raises the sink line as much as {_g(ratio)} units of k")
    tgt = pol.preferred_target(params, scn.unit_costs)
    out.append(f"Preferred target: {tgt.target.value} (margin {_g(tgt.margin)}, "
               f"unit costs b = {_g(scn.unit_costs[0])}, k = {_g(scn.unit_costs[1])})")
    _emit(args, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_theorem(args) -> int:
    scn = _load(args)
    params = scn.params
    reg = an.regime(params)
    lines, ok = [], True
    if reg is an.Regime.SINK_COLLAPSE:
        lines.append("regime SinkCollapse: every organization collapses regardless of its state")
        for label in scn.states:
            lines.append(f"{label}: verdict=CollapseGuaranteed (regime)")
    elif reg is an.Regime.DEGENERATE:
        raise DegenerateError("degenerate parameters: no isolated fixed point")
    else:
        for label, rep in _verdicts(scn):
            lines.append(
                f"{label}: dS/dt={_g(rep.dS_dt)} dF/dt={_g(rep.dF_dt)} "
                f"class={rep.classification.kind.value} verdict={rep.verdict.value}"
            )
            if not (rep.verdict is an.Verdict.COLLAPSE_GUARANTEED or rep.classification.defeated):
                ok = False
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_NOT_DEFEATED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orgdyn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("scenario", help="scenario file")
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a parameter after parsing (repeatable)")
        return p

    def sim_opts(p):
        p.add_argument("--method", choices=[m.value for m in Method])
        p.add_argument("--dt", type=float)
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--sample-every", dest="sample_every", type=int)

    common(sub.add_parser("analyze", help="closed-form analysis report")).set_defaults(func=cmd_analyze)

    p = common(sub.add_parser("simulate", help="one CSV trajectory per state"))
    sim_opts(p)
    p.add_argument("--out-dir", default=".", help="directory for <state>.csv files")
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("portrait", help="SVG phase portrait"))
    sim_opts(p)
    p.add_argument("--bounds", help="Lmin,Lmax,Fmin,Fmax (default: fit to 2x fixed point and states)")
    p.add_argument("--grid", default="15x15", help="vector field resolution NxM")
    p.add_argument("--iso", action="store_true", help="draw iso-strength lines")
    p.add_argument("--no-arrows", action="store_true")
    p.set_defaults(func=cmd_portrait)

    p = common(sub.add_parser("sweep", help="sink line across a parameter range"))
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="from_", type=float, required=True)
    p.add_argument("--to", type=float, required=True)
    p.add_argument("--steps", type=int, default=11)
    p.set_defaults(func=cmd_sweep)

    common(sub.add_parser("policy", help="budget allocation comparison")).set_defaults(func=cmd_policy)
    common(sub.add_parser("theorem", help="victory-theorem check per state")).set_defaults(func=cmd_theorem)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except oio.ScenarioInvariantError as e:
        print(f"orgdyn: invalid scenario: {e}", file=sys.stderr)
        return EXIT_INVALID
    except oio.ScenarioError as e:
        print(f"orgdyn: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, InvalidParameterError, StepSizeError, DomainError, ValueError) as e:
        print(f"orgdyn: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (DegenerateError, RegimeError) as e:
        print(f"orgdyn: degenerate analysis: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OrgDynError as e:
        print(f"orgdyn: {e}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
