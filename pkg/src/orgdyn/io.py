"""Scenario files, trajectory CSV, SVG phase portraits and text reports.

Scenario format (UTF-8, one ``key = value`` per line, ``#`` starts a comment)::

    [params]
    p = 0.1
    r = 0.25
    m = 10
    d = 0.3          # or d_L / d_F separately
    b = 2
    k = 5

    [state.alpha]
    L = 5
    F = 60

    [simulate]       # optional
    method = closed
    dt = 0.01
    t_max = 100
    sample_every = 10

    [cost]           # optional
    c1 = 1
    c2 = 1
    sigma = 2
    B = 100
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import analysis as an
from .model import (
    InvalidParameterError,
    OrgDynError,
    OrgParams,
    OrgState,
)
from .policy import CostModel
from .simulate import Method, SimOptions, StepSizeError, Trajectory, vector_field


class ScenarioError(OrgDynError):
    """Malformed scenario text."""

    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class ScenarioInvariantError(ScenarioError):
    """Well-formed scenario whose values violate a model invariant."""


PARAM_KEYS = ("p", "r", "m", "b", "k", "d", "d_L", "d_F")
STATE_KEYS = ("L", "F", "t")
SIM_KEYS = ("method", "dt", "t_max", "sample_every")
COST_KEYS = ("c1", "c2", "sigma", "B", "unit_cost_b", "unit_cost_k")
_STATE_NAME = re.compile(r"^[A-Za-z0-9_\-]+$")


@dataclass
class Scenario:
    params: OrgParams
    states: Dict[str, OrgState] = field(default_factory=dict)
    sim: SimOptions = field(default_factory=SimOptions)
    cost: Optional[CostModel] = None
    unit_costs: Tuple[float, float] = (1.0, 1.0)

    @property
    def labels(self) -> List[str]:
        return list(self.states)


def _number(raw: str, key: str, lineno: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ScenarioError(f"{key}: not a number: {raw!r}", lineno, key) from None
    if not math.isfinite(value):
        raise ScenarioError(f"{key}: must be finite, got {raw!r}", lineno, key)
    return value


def _sections(text: str):
    """Yield ``(section, key, value, lineno)``; checks syntax and duplicates."""
    section = None
    seen_sections = set()
    seen_keys = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ScenarioError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section.startswith("state."):
                name = section[len("state."):]
                if not _STATE_NAME.match(name):
                    raise ScenarioError(f"bad state name {name!r}", lineno)
            elif section not in ("params", "simulate", "cost"):
                raise ScenarioError(f"unknown section [{section}]", lineno)
            if section in seen_sections:
                raise ScenarioError(f"duplicate section [{section}]", lineno)
            seen_sections.add(section)
            yield section, None, None, lineno
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        if section is None:
            raise ScenarioError("key outside of any section", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if (section, key) in seen_keys:
            raise ScenarioError(f"duplicate key {key!r} in [{section}]", lineno, key)
        seen_keys.add((section, key))
        yield section, key, value, lineno


def parse_scenario(text: str) -> Scenario:
    raw: Dict[str, Dict[str, Tuple[str, int]]] = {}
    header_line: Dict[str, int] = {}
    for section, key, value, lineno in _sections(text):
        if key is None:
            raw.setdefault(section, {})
            header_line[section] = lineno
            continue
        allowed = (PARAM_KEYS if section == "params" else
                   SIM_KEYS if section == "simulate" else
                   COST_KEYS if section == "cost" else STATE_KEYS)
        if key not in allowed:
            raise ScenarioError(f"unknown key {key!r} in [{section}]", lineno, key)
        raw[section][key] = (value, lineno)

    if "params" not in raw:
        raise ScenarioError("missing [params] section")
    params = _parse_params(raw["params"], header_line["params"])

    states = {}
    for section, entries in raw.items():
        if not section.startswith("state."):
            continue
        name = section[len("state."):]
        for key in ("L", "F"):
            if key not in entries:
                raise ScenarioError(f"[{section}] missing {key!r}", header_line[section], key)
        vals = {k: _number(v, k, n) for k, (v, n) in entries.items()}
        for key in ("L", "F"):
            if vals[key] < 0:
                raise ScenarioInvariantError(f"[{section}] {key} must be >= 0, got {vals[key]}",
                                             entries[key][1], key)
        states[name] = OrgState(vals["L"], vals["F"], vals.get("t", 0.0))

    sim = SimOptions()
    if "simulate" in raw:
        sim = _parse_sim(raw["simulate"])

    cost, unit_costs = None, (1.0, 1.0)
    if "cost" in raw:
        cost, unit_costs = _parse_cost(raw["cost"], header_line["cost"])
    return Scenario(params, states, sim, cost, unit_costs)


def _parse_params(entries, header_lineno) -> OrgParams:
    vals = {k: _number(v, k, n) for k, (v, n) in entries.items()}
    if "d" in vals and ("d_L" in vals or "d_F" in vals):
        clash = "d_L" if "d_L" in vals else "d_F"
        raise ScenarioError(f"conflicting desertion rates: 'd' given together with {clash!r}",
                            entries[clash][1], clash)
    if "d" in vals:
        vals["d_L"] = vals["d_F"] = vals.pop("d")
    for key in ("p", "r", "m", "b", "k", "d_L", "d_F"):
        if key not in vals:
            hint = " (or 'd')" if key in ("d_L", "d_F") else ""
            raise ScenarioError(f"missing required parameter {key!r}{hint}", header_lineno, key)
    try:
        return OrgParams(**vals)
    except InvalidParameterError as e:
        key = str(e).split(" ", 1)[0]
        line = entries.get(key, entries.get("d", (None, None)))[1]
        raise ScenarioInvariantError(str(e), line, key) from None


def _parse_sim(entries) -> SimOptions:
    kw = {}
    for key, (value, lineno) in entries.items():
        if key == "method":
            if value not in ("closed", "rk4"):
                raise ScenarioError(f"method must be 'closed' or 'rk4', got {value!r}", lineno, key)
            kw[key] = Method(value)
        elif key == "sample_every":
            v = _number(value, key, lineno)
            if v != int(v):
                raise ScenarioInvariantError(f"sample_every must be an integer, got {value}", lineno, key)
            kw[key] = int(v)
        else:
            kw[key] = _number(value, key, lineno)
    try:
        return SimOptions(**kw)
    except StepSizeError as e:
        raise ScenarioInvariantError(str(e)) from None


def _parse_cost(entries, header_lineno):
    vals = {k: _number(v, k, n) for k, (v, n) in entries.items()}
    for key in ("c1", "c2", "sigma", "B"):
        if key not in vals:
            raise ScenarioError(f"[cost] missing {key!r}", header_lineno, key)
    unit = (vals.pop("unit_cost_b", 1.0), vals.pop("unit_cost_k", 1.0))
    if unit[0] <= 0 or unit[1] <= 0:
        raise ScenarioInvariantError(f"unit costs must be > 0, got {unit}")
    try:
        return CostModel(**vals), unit
    except InvalidParameterError as e:
        raise ScenarioInvariantError(str(e)) from None


def _fmt(x: float) -> str:
    return repr(float(x))


def serialize_scenario(scn: Scenario) -> str:
    """Canonical text form; ``parse_scenario`` of it gives back the same scenario."""
    p = scn.params
    out = ["[params]"]
    for key in ("p", "r", "m", "b", "k"):
        out.append(f"{key} = {_fmt(getattr(p, key))}")
    if p.is_uniform:
        out.append(f"d = {_fmt(p.d_L)}")
    else:
        out.append(f"d_L = {_fmt(p.d_L)}")
        out.append(f"d_F = {_fmt(p.d_F)}")
    for name, s in scn.states.items():
        out += ["", f"[state.{name}]", f"L = {_fmt(s.L)}", f"F = {_fmt(s.F)}"]
        if s.t != 0:
            out.append(f"t = {_fmt(s.t)}")
    o = scn.sim
    out += ["", "[simulate]", f"method = {o.method.value}", f"dt = {_fmt(o.dt)}",
            f"t_max = {_fmt(o.t_max)}", f"sample_every = {int(o.sample_every)}"]
    if scn.cost is not None:
        c = scn.cost
        out += ["", "[cost]", f"c1 = {_fmt(c.c1)}", f"c2 = {_fmt(c.c2)}",
                f"sigma = {_fmt(c.sigma)}", f"B = {_fmt(c.B)}"]
        if scn.unit_costs != (1.0, 1.0):
            out += [f"unit_cost_b = {_fmt(scn.unit_costs[0])}",
                    f"unit_cost_k = {_fmt(scn.unit_costs[1])}"]
    return "\n".join(out) + "\n"


# -- trajectories ------------------------------------------------------------

def _g12(x: float) -> str:
    return f"{x:.12g}"


def write_trajectory_csv(traj: Trajectory) -> str:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    rows = ["t,L,F,S"]
    for t, L, F, S in traj.samples:
        rows.append(",".join(_g12(v) for v in (t, L, F, S)))
    rows.append(f"# outcome={traj.outcome.value}")
    return "\n".join(rows) + "\n"


def read_trajectory_csv(text: str) -> Tuple[np.ndarray, Optional[str]]:
    """Inverse of :func:`write_trajectory_csv`: ``(rows[n, 4], outcome)``."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != "t,L,F,S":
        raise ValueError("missing 't,L,F,S' header")
    rows, outcome = [], None
    for line in lines[1:]:
        if line.startswith("#"):
            if line.startswith("# outcome="):
                outcome = line[len("# outcome="):].strip()
            continue
        if line.strip():
            rows.append([float(v) for v in line.split(",")])
    return np.asarray(rows, dtype=float).reshape(-1, 4), outcome


# -- SVG portrait ------------------------------------------------------------

LAYERS = ("arrows", "isostrength", "sink", "trend", "orbits")
DEFAULT_LAYERS = frozenset({"arrows", "sink", "trend", "orbits"})

# (stroke color, stroke width) by orbit class
DEFAULT_PALETTE = {
    "Defeated": ("#1f5fbf", 1.0),
    "PType": ("#c0392b", 2.5),
    "RType": ("#c0392b", 2.5),
    "OnSinkLine": ("#7f7f7f", 1.5),
    "OnTrendLine": ("#7f7f7f", 1.5),
}


@dataclass(frozen=True)
class PortraitSpec:
    bounds: Tuple[float, float, float, float]
    layers: frozenset = DEFAULT_LAYERS
    grid: Tuple[int, int] = (15, 15)
    palette: Dict[str, Tuple[str, float]] = field(default_factory=lambda: dict(DEFAULT_PALETTE))
    width: int = 600
    height: int = 600
    margin: int = 50
    iso_levels: int = 6

    def __post_init__(self):
        L0, L1, F0, F1 = self.bounds
        if not (L1 > L0 and F1 > F0):
            raise ValueError(f"degenerate bounds {self.bounds}")
        unknown = set(self.layers) - set(LAYERS)
        if unknown:
            raise ValueError(f"unknown layers {sorted(unknown)}")
        if self.palette["Defeated"] == self.palette["PType"] or self.palette["Defeated"] == self.palette["RType"]:
            raise ValueError("defeated and growing orbits need distinct palette entries")


def _clip_line(point, direction, bounds) -> Optional[Tuple[Tuple[float, float], Tuple[float, float]]]:
    """Liang-Barsky clip of the infinite line ``point + s*direction`` to the box."""
    L0, L1, F0, F1 = bounds
    (x, y), (u, v) = point, direction
    lo, hi = -math.inf, math.inf
    for q, dq, a, b in ((x, u, L0, L1), (y, v, F0, F1)):
        if dq == 0:
            if q < a or q > b:
                return None
            continue
        s1, s2 = (a - q) / dq, (b - q) / dq
        lo, hi = max(lo, min(s1, s2)), min(hi, max(s1, s2))
    if lo > hi:
        return None
    return (x + lo * u, y + lo * v), (x + hi * u, y + hi * v)


class _Canvas:
    def __init__(self, spec: PortraitSpec):
        self.spec = spec
        L0, L1, F0, F1 = spec.bounds
        self.sx = (spec.width - 2 * spec.margin) / (L1 - L0)
        self.sy = (spec.height - 2 * spec.margin) / (F1 - F0)

    def x(self, L):
        return self.spec.margin + (L - self.spec.bounds[0]) * self.sx

    def y(self, F):
        return self.spec.height - self.spec.margin - (F - self.spec.bounds[2]) * self.sy


def _f2(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


def render_portrait(analysis: an.PhaseAnalysis, trajectories: Sequence[Trajectory],
                    spec: PortraitSpec) -> str:
    """SVG 1.1 phase portrait, L horizontal and F vertical, origin bottom-left."""
    cv = _Canvas(spec)
    L0, L1, F0, F1 = spec.bounds
    m = spec.margin
    pw, ph = spec.width - 2 * m, spec.height - 2 * m
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{spec.width}" '
        f'height="{spec.height}" viewBox="0 0 {spec.width} {spec.height}">',
        "<defs>",
        '<marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" orient="auto">'
        '<path d="M0,0 L6,3 L0,6 z" fill="#555555"/></marker>',
        f'<clipPath id="plot"><rect x="{m}" y="{m}" width="{pw}" height="{ph}"/></clipPath>',
        "</defs>",
        f'<rect x="{m}" y="{m}" width="{pw}" height="{ph}" fill="white" stroke="black"/>',
        f'<text x="{spec.width / 2:.0f}" y="{spec.height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">L (leaders)</text>',
        f'<text x="14" y="{spec.height / 2:.0f}" text-anchor="middle" font-family="sans-serif" '
        f'font-size="14" transform="rotate(-90 14 {spec.height / 2:.0f})">F (foot soldiers)</text>',
        f'<text x="{m}" y="{spec.height - m + 16}" font-family="sans-serif" font-size="11">{L0:.4g}</text>',
        f'<text x="{spec.width - m}" y="{spec.height - m + 16}" text-anchor="end" '
        f'font-family="sans-serif" font-size="11">{L1:.4g}</text>',
        f'<text x="{m - 4}" y="{spec.height - m}" text-anchor="end" font-family="sans-serif" '
        f'font-size="11">{F0:.4g}</text>',
        f'<text x="{m - 4}" y="{m + 10}" text-anchor="end" font-family="sans-serif" '
        f'font-size="11">{F1:.4g}</text>',
    ]
    layers = spec.layers
    params = analysis.params

    if "arrows" in layers:
        grid = vector_field(params, spec.bounds, spec.grid)
        px = grid.arrows[:, 0] * cv.sx
        py = -grid.arrows[:, 1] * cv.sy
        longest = float(np.max(np.hypot(px, py)))
        cell = min(pw / spec.grid[0], ph / spec.grid[1])
        scale = 0.9 * cell / longest if longest > 0 else 0.0
        out.append('<g id="arrows" stroke="#555555" stroke-width="0.8">')
        for (L, F), dx, dy in zip(grid.points, px, py):
            x0, y0 = cv.x(L), cv.y(F)
            out.append(f'<line class="arrow" x1="{_f2(x0)}" y1="{_f2(y0)}" '
                       f'x2="{_f2(x0 + dx * scale)}" y2="{_f2(y0 + dy * scale)}" marker-end="url(#head)"/>')
        out.append("</g>")

    if "isostrength" in layers:
        s_max = params.m * max(abs(L0), abs(L1)) + max(abs(F0), abs(F1))
        out.append('<g id="isostrength" stroke="#2e8b57" stroke-width="0.8" stroke-dasharray="2,3">')
        for i in range(1, spec.iso_levels + 1):
            S = s_max * i / (spec.iso_levels + 1)
            seg = _clip_line((0.0, S), (1.0, -params.m), spec.bounds)
            if seg:
                (a, b), (c, d) = seg
                out.append(f'<line class="isostrength" x1="{_f2(cv.x(a))}" y1="{_f2(cv.y(b))}" '
                           f'x2="{_f2(cv.x(c))}" y2="{_f2(cv.y(d))}"/>')
        out.append("</g>")

    for name, line, stroke in (("sink", analysis.sink, 'stroke="#d62728" stroke-width="3"'),
                               ("trend", analysis.trend,
                                'stroke="black" stroke-width="1" stroke-dasharray="6,4"')):
        if name not in layers or line is None:
            continue
        seg = _clip_line((line.anchor.L, line.anchor.F), line.direction, spec.bounds)
        if seg:
            (a, b), (c, d) = seg
            out.append(f'<line id="{name}-line" class="manifold {name}" x1="{_f2(cv.x(a))}" '
                       f'y1="{_f2(cv.y(b))}" x2="{_f2(cv.x(c))}" y2="{_f2(cv.y(d))}" {stroke}/>')

    if "orbits" in layers and trajectories:
        out.append('<g id="orbits" fill="none" clip-path="url(#plot)">')
        for traj in trajectories:
            kind = _orbit_kind(traj)
            color, width = spec.palette[kind]
            pts = " L ".join(f"{_f2(cv.x(L))} {_f2(cv.y(F))}" for L, F in zip(traj.L, traj.F))
            out.append(f'<path class="orbit {kind}" d="M {pts}" stroke="{color}" stroke-width="{width}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _orbit_kind(traj: Trajectory) -> str:
    if traj.classification is not None:
        return traj.classification.kind.value
    from .simulate import Outcome

    return "RType" if traj.outcome is Outcome.GROWING_AT_HORIZON else "Defeated"


# -- text report -------------------------------------------------------------

SUSTAIN = "sustain the scale of operations (do not reduce b, k)"
INCREASE = "an increase in CT measures would be necessary"


def _g(x: float) -> str:
    return f"{x:.6g}"


def write_report(analysis: an.PhaseAnalysis,
                 verdicts: Iterable[Tuple[str, an.VictoryReport]] = (),
                 color: bool = False) -> str:
    """Plain-text analysis of one parameter set and per-state verdicts."""
    bold = (lambda s: f"\033[1m{s}\033[0m") if color else (lambda s: s)
    p = analysis.params
    out = [bold("Organization dynamics report"), ""]
    out.append("Parameters: " + " ".join(f"{k}={_g(v)}" for k, v in p.as_dict().items()))
    if p.low_leader_weight:
        out.append("Warning: m <= 1, leaders weigh no more than foot soldiers")
    den = an.denominator(p)
    out.append(f"Regime: {analysis.regime.value} (d_L*(r-d_F) + r*m*p = {_g(den)})")
    eig = analysis.eigen
    out.append(f"Eigenvalues: lambda1 = {_g(eig.lambda1)}, lambda2 = {_g(eig.lambda2)}")
    if p.is_uniform:
        out.append(f"Critical desertion rate: {_g(an.critical_desertion(p.p, p.r, p.m))}")

    if analysis.regime is an.Regime.SINK_COLLAPSE:
        fp = analysis.fixed_point
        out.append(f"Fixed point: L* = {_g(fp.L_star)}, F* = {_g(fp.F_star)} (outside the first quadrant)")
        out.append("")
        out.append(bold("Organization collapses for all initial conditions, "
                        "regardless of the counter-terrorism levels b, k."))
        return "\n".join(out) + "\n"
    if analysis.regime is an.Regime.DEGENERATE:
        out.append("")
        out.append("Degenerate parameters: no isolated fixed point; no sink line.")
        return "\n".join(out) + "\n"

    fp = analysis.fixed_point
    flag = " [outside the first quadrant]" if fp.negative else ""
    out.append(f"Fixed point: L* = {_g(fp.L_star)}, F* = {_g(fp.F_star)}{flag}")
    out.append(f"Sink line: slope = {_g(analysis.sink.slope)}, F-intercept = {_g(analysis.sink.f_intercept)}")
    out.append(f"Trend line: slope = {_g(analysis.trend.slope)}, F-intercept = {_g(analysis.trend.f_intercept)}")
    out.append(f"Long-run F/L ratio of growing organizations: {_g(analysis.trend.slope)}")
    if not an.theorem_applies(p):
        out.append("Note: sink line steeper than the iso-strength lines; "
                   "a joint decline of S and F does not guarantee collapse here.")

    for label, rep in verdicts:
        s = rep.state
        c = rep.classification
        out.append("")
        out.append(bold(f"State {label}: L = {_g(s.L)}, F = {_g(s.F)}, S = {_g(p.m * s.L + s.F)}"))
        out.append(f"  classification: {c.kind.value} (d1 = {_g(c.coords.d1)}, d2 = {_g(c.coords.d2)})")
        out.append(f"  dS/dt = {_g(rep.dS_dt)}, dF/dt = {_g(rep.dF_dt)}")
        reason = f" ({'; '.join(rep.failing)})" if rep.failing else ""
        out.append(f"  verdict: {rep.verdict.value}{reason}")
        out.append(f"  recommendation: {SUSTAIN if c.defeated else INCREASE}")
    return "\n".join(out) + "\n"
