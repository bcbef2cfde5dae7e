"""Closed-form phase-plane analysis of the affine model.

The fixed point is a saddle whenever ``d_L*(r - d_F) + r*m*p > 0``.  Its
stable manifold (the sink line) separates organizations that collapse from
those that grow; the unstable manifold (the trend line) is the direction all
growing organizations approach.  States are located relative to both lines by
their coordinates ``(d1, d2)`` in the eigenbasis about the fixed point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from .model import (
    DegenerateError,
    OrgParams,
    OrgState,
    RegimeError,
    derivative,
    system_matrix,
)

DENOMINATOR_EPS = 1e-12
EIGEN_GAP_EPS = 1e-12
DEFAULT_TOL = 1e-9


class Regime(str, Enum):
    SADDLE = "Saddle"
    SINK_COLLAPSE = "SinkCollapse"
    DEGENERATE = "Degenerate"


class Kind(str, Enum):
    DEFEATED = "Defeated"
    PTYPE = "PType"
    RTYPE = "RType"
    ON_SINK_LINE = "OnSinkLine"
    ON_TREND_LINE = "OnTrendLine"


class Verdict(str, Enum):
    COLLAPSE_GUARANTEED = "CollapseGuaranteed"
    NOT_SUFFICIENT = "NotSufficient"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class FixedPoint:
    L_star: float
    F_star: float
    denominator: float

    @property
    def negative(self) -> bool:
        """Flag for equilibria outside the first quadrant."""
        return self.L_star < 0 or self.F_star < 0

    def as_state(self) -> OrgState:
        return OrgState(self.L_star, self.F_star)


@dataclass(frozen=True)
class EigenStructure:
    lambda1: float
    lambda2: float
    e1: Tuple[float, float]
    e2: Tuple[float, float]
    discriminant: float

    @property
    def slope1(self) -> float:
        return self.e1[1] / self.e1[0]

    @property
    def slope2(self) -> float:
        return self.e2[1] / self.e2[0]


@dataclass(frozen=True)
class Line:
    anchor: OrgState
    direction: Tuple[float, float]
    slope: float
    f_intercept: float


@dataclass(frozen=True)
class EigenCoords:
    d1: float
    d2: float


@dataclass(frozen=True)
class Classification:
    kind: Kind
    coords: EigenCoords

    @property
    def defeated(self) -> bool:
        return self.kind is Kind.DEFEATED


@dataclass(frozen=True)
class VictoryReport:
    state: OrgState
    dS_dt: float
    dF_dt: float
    verdict: Verdict
    classification: Classification
    theorem_applies: bool
    failing: Tuple[str, ...]

    @property
    def strength_declining(self) -> bool:
        return self.dS_dt < 0

    @property
    def foot_soldiers_declining(self) -> bool:
        return self.dF_dt < 0


@dataclass(frozen=True)
class PhaseAnalysis:
    """Everything the report and portrait need about one parameter set."""

    params: OrgParams
    regime: Regime
    fixed_point: Optional[FixedPoint]
    eigen: EigenStructure
    sink: Optional[Line]
    trend: Optional[Line]

    @property
    def saddle(self) -> bool:
        return self.regime is Regime.SADDLE


def denominator(params: OrgParams) -> float:
    return params.d_L * (params.r - params.d_F) + params.r * params.m * params.p


def fixed_point(params: OrgParams) -> FixedPoint:
    den = denominator(params)
    if abs(den) <= DENOMINATOR_EPS:
        raise DegenerateError(f"no isolated fixed point: d_L*(r-d_F)+r*m*p = {den:.3g}")
    p, r, m, b, k = params.p, params.r, params.m, params.b, params.k
    L = (k * p - b * (r - params.d_F)) / den
    F = (k * params.d_L + r * m * b) / den
    return FixedPoint(L, F, den)


def regime(params: OrgParams) -> Regime:
    den = denominator(params)
    if abs(den) <= DENOMINATOR_EPS:
        return Regime.DEGENERATE
    return Regime.SADDLE if den > 0 else Regime.SINK_COLLAPSE


def _unit(x: float, y: float) -> Tuple[float, float]:
    n = math.hypot(x, y)
    return x / n, y / n


def eigen_structure(params: OrgParams) -> EigenStructure:
    """Eigenvalues and unit eigenvectors of the Jacobian.

    With ``c = r - d_F + d_L`` the discriminant is ``c**2 + 4*r*m*p``, which is
    positive for every valid parameter set, so eigenvalues are always real.
    Eigenvectors are ``(p, lambda + d_L)`` normalized, so both have positive
    L-component.
    """
    A = system_matrix(params)
    rmp = params.r * params.m * params.p
    c = params.r - params.d_F + params.d_L
    disc = c * c + 4.0 * rmp
    assert disc >= 0.0, "eigenvalues must be real"
    root = math.sqrt(disc)
    tr, det = A.trace, A.det
    # avoid cancellation in the small-magnitude root
    if tr >= 0:
        lam1 = 0.5 * (tr + root)
        lam2 = det / lam1 if lam1 != 0 else 0.5 * (tr - root)
    else:
        lam2 = 0.5 * (tr - root)
        lam1 = det / lam2
    if lam1 - lam2 <= EIGEN_GAP_EPS * max(1.0, abs(lam1), abs(lam2)):
        raise DegenerateError(f"repeated eigenvalue {lam1:.6g}")
    # lambda + d_L = (c +- root)/2, rewritten stably via (root-c)(root+c) = 4rmp
    if c >= 0:
        up = 0.5 * (c + root)
        down = -2.0 * rmp / (c + root)
    else:
        up = 2.0 * rmp / (root - c)
        down = 0.5 * (c - root)
    e1 = _unit(params.p, up)
    e2 = _unit(params.p, down)
    return EigenStructure(lam1, lam2, e1, e2, disc)


def critical_desertion(p: float, r: float, m: float) -> float:
    """Uniform desertion rate above which every organization collapses.

    Root of ``d**2 - r*d - r*m*p = 0``: beyond it ``d*(r-d) + r*m*p < 0`` and
    the saddle turns into a sink with ``F* < 0``.
    """
    return 0.5 * (r + math.sqrt(r * r + 4.0 * r * m * p))


def _line(anchor: OrgState, direction: Tuple[float, float]) -> Line:
    slope = direction[1] / direction[0]
    return Line(anchor, direction, slope, anchor.F - slope * anchor.L)


def _require_saddle(params: OrgParams, what: str) -> None:
    reg = regime(params)
    if reg is not Regime.SADDLE:
        raise RegimeError(f"{what} needs a saddle fixed point, regime is {reg.value}")


def sink_line(params: OrgParams) -> Line:
    _require_saddle(params, "sink line")
    return _line(fixed_point(params).as_state(), eigen_structure(params).e2)


def trend_line(params: OrgParams) -> Line:
    _require_saddle(params, "trend line")
    return _line(fixed_point(params).as_state(), eigen_structure(params).e1)


def _coords(fp: FixedPoint, eig: EigenStructure, state: OrgState) -> EigenCoords:
    (a, c), (b, d) = eig.e1, eig.e2
    det = a * d - b * c
    if abs(det) <= 1e-14:
        raise DegenerateError("eigenvectors are (numerically) parallel")
    x = state.L - fp.L_star
    y = state.F - fp.F_star
    return EigenCoords((d * x - b * y) / det, (a * y - c * x) / det)


def eigen_coords(params: OrgParams, state: OrgState) -> EigenCoords:
    """Solve ``state - fixed point = d1*e1 + d2*e2``."""
    _require_saddle(params, "eigen coordinates")
    return _coords(fixed_point(params), eigen_structure(params), state)


def _kind(coords: EigenCoords, tau: float) -> Kind:
    d1, d2 = coords.d1, coords.d2
    if d1 < -tau:
        return Kind.DEFEATED
    if d1 <= tau:
        return Kind.ON_SINK_LINE
    if d2 < -tau:
        return Kind.PTYPE
    if d2 > tau:
        return Kind.RTYPE
    return Kind.ON_TREND_LINE


def classify(params: OrgParams, state: OrgState, tol: float = DEFAULT_TOL) -> Classification:
    """Defeated / p-type / r-type by the signs of the eigen coordinates.

    ``tol`` is relative to the distance of ``state`` from the fixed point.
    """
    coords = eigen_coords(params, state)
    fp = fixed_point(params)
    tau = tol * math.hypot(state.L - fp.L_star, state.F - fp.F_star)
    return Classification(_kind(coords, tau), coords)


def theorem_applies(params: OrgParams) -> bool:
    """Whether the sink line is flatter than the iso-strength lines (slope -m).

    Always true for uniform desertion; with split rates it is equivalent to
    ``d_F < d_L + p*m``.  The collapse theorem relies on it.
    """
    return eigen_structure(params).slope2 > -params.m


def victory_check(params: OrgParams, state: OrgState, tol: float = DEFAULT_TOL) -> VictoryReport:
    dL, dF = derivative(params, state)
    dS = params.m * dL + dF
    cls = classify(params, state, tol)
    applies = theorem_applies(params)
    failing = []
    if not dS < 0:
        failing.append("strength not declining")
    if not dF < 0:
        failing.append("foot soldiers not declining")
    if failing:
        verdict = Verdict.NOT_SUFFICIENT
    elif applies:
        verdict = Verdict.COLLAPSE_GUARANTEED
    else:
        verdict = Verdict.INCONCLUSIVE
    return VictoryReport(state, dS, dF, verdict, cls, applies, tuple(failing))


def analyze(params: OrgParams) -> PhaseAnalysis:
    reg = regime(params)
    eig = eigen_structure(params)
    fp = None if reg is Regime.DEGENERATE else fixed_point(params)
    sink = trend = None
    if reg is Regime.SADDLE:
        sink = _line(fp.as_state(), eig.e2)
        trend = _line(fp.as_state(), eig.e1)
    return PhaseAnalysis(params, reg, fp, eig, sink, trend)
