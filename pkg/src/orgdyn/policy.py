"""Counter-terrorism policy analytics built on the sink line.

Raising the sink line above the organization's current state is what defeats
it, so every policy lever is judged by how far it moves that line.  Two
budget allocators are provided for a one-off strike removing ``l`` leaders and
``f`` foot soldiers at cost ``c1*l**sigma + c2*f**sigma``: the classical one
that maximizes the immediate strength loss ``m*l + f``, and one that pushes the
post-strike state as deep below the sink line as possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple, Union

from .analysis import (
    Classification,
    Kind,
    Line,
    Regime,
    _coords,
    _kind,
    DEFAULT_TOL,
    eigen_structure,
    fixed_point,
    regime,
    sink_line,
)
from .model import (
    PARAM_NAMES,
    DegenerateError,
    InvalidParameterError,
    OrgParams,
    OrgState,
    RegimeError,
    require_first_quadrant,
    system_matrix,
)

FD_REL_STEP = 1e-6
GOLDEN_TOL = 1e-10
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SensitivityReport:
    parameter: str
    baseline: Line
    perturbed: Line
    delta: float
    intercept_shift: float  # d(F-intercept)/d(parameter)
    slope_change: float     # d(slope)/d(parameter)


@dataclass(frozen=True)
class CostModel:
    c1: float
    c2: float
    sigma: float
    B: float

    def __post_init__(self):
        if not self.c1 > 0 or not self.c2 > 0:
            raise InvalidParameterError(f"cost coefficients must be > 0, got c1={self.c1}, c2={self.c2}")
        if not self.sigma > 1:
            raise InvalidParameterError(f"sigma must be > 1 (diminishing returns), got {self.sigma}")
        if not self.B >= 0:
            raise InvalidParameterError(f"budget must be >= 0, got {self.B}")

    def cost(self, l: float, f: float) -> float:
        return self.c1 * l ** self.sigma + self.c2 * f ** self.sigma

    def boundary(self, theta: float) -> Tuple[float, float]:
        """Point on ``cost == B``; theta runs from all-leaders (0) to all-foot-soldiers (pi/2)."""
        c, s = math.cos(theta), math.sin(theta)
        l = (self.B * c * c / self.c1) ** (1.0 / self.sigma)
        f = (self.B * s * s / self.c2) ** (1.0 / self.sigma)
        return l, f


@dataclass(frozen=True)
class AllocationResult:
    l: float
    f: float
    delta_S: float
    cost: float
    post_state: Optional[OrgState] = None
    post_classification: Optional[Classification] = None

    @property
    def defeats(self) -> bool:
        return self.post_classification is not None and self.post_classification.defeated


@dataclass(frozen=True)
class Infeasible:
    """No allocation within budget puts the organization below the sink line."""

    min_d1: float
    best: AllocationResult


class Target(str, Enum):
    LEADERS = "Leaders"
    FOOT_SOLDIERS = "FootSoldiers"


@dataclass(frozen=True)
class TargetReport:
    target: Target
    margin: float        # relative gap between the two cost-normalized shifts
    leader_shift: float  # sink F-intercept gain per unit cost spent on b
    foot_shift: float    # ... on k


@dataclass(frozen=True)
class StrategyComparison:
    tangency: AllocationResult
    feasible: Union[AllocationResult, Infeasible]
    already_defeated: bool
    tangency_defeats: bool
    feasible_defeats: bool

    @property
    def tangency_suboptimal(self) -> bool:
        """Strength-maximizing strike misses while another affordable one succeeds."""
        return not self.tangency_defeats and self.feasible_defeats


def _intercept_and_slope(params: OrgParams, what: str) -> Line:
    if regime(params) is not Regime.SADDLE:
        raise RegimeError(f"{what} leaves the saddle regime ({regime(params).value})")
    return sink_line(params)


def sink_sensitivity(params: OrgParams, which: str, delta: Optional[float] = None) -> SensitivityReport:
    """Rate of change of the sink line's F-intercept and slope in one parameter.

    Central differences with step ``delta`` (default: relative step 1e-6).
    """
    if which == "d":
        raise InvalidParameterError("use d_L or d_F")
    if which not in PARAM_NAMES:
        raise InvalidParameterError(f"unknown parameter {which!r}")
    value = getattr(params, which)
    h = FD_REL_STEP * max(abs(value), 1.0) if delta is None else float(delta)
    if not h > 0:
        raise InvalidParameterError(f"perturbation must be > 0, got {h}")
    base = _intercept_and_slope(params, "baseline")
    lo_val = value - h
    try:
        hi = _intercept_and_slope(params.with_(**{which: value + h}), f"{which}+{h:g}")
        if lo_val < 0 and which in ("b", "k", "d_L", "d_F"):
            # one-sided at the boundary of the admissible range
            lo, lo_val = base, value
        else:
            lo = _intercept_and_slope(params.with_(**{which: lo_val}), f"{which}-{h:g}")
    except InvalidParameterError as e:
        raise RegimeError(f"perturbing {which} leaves the valid parameter range: {e}") from None
    span = (value + h) - lo_val
    return SensitivityReport(
        parameter=which,
        baseline=base,
        perturbed=hi,
        delta=h,
        intercept_shift=(hi.f_intercept - lo.f_intercept) / span,
        slope_change=(hi.slope - lo.slope) / span,
    )


def fixed_point_gradients(params: OrgParams):
    """d(fixed point)/db and d(fixed point)/dk, the columns of the inverse Jacobian."""
    A = system_matrix(params)
    det = A.det
    if abs(det) <= 1e-14:
        raise DegenerateError("singular Jacobian")
    # A x* = (b, k)  =>  dx*/db = A^-1 (1, 0), dx*/dk = A^-1 (0, 1)
    d_db = (A.a22 / det, -A.a21 / det)
    d_dk = (-A.a12 / det, A.a11 / det)
    return d_db, d_dk


def _normal_projection(params: OrgParams, v) -> float:
    e2 = eigen_structure(params).e2
    # unit normal to the sink line, pointing to the growing side
    n = (-e2[1], e2[0])
    return n[0] * v[0] + n[1] * v[1]


def bk_equivalence(params: OrgParams) -> float:
    """Units of ``k`` equivalent to one unit of ``b`` in raising the sink line.

    Both derivatives of the fixed point are projected onto the normal of the
    sink line; the ratio of projection lengths is returned.
    """
    if regime(params) is not Regime.SADDLE:
        raise RegimeError("b/k equivalence needs a saddle")
    d_db, d_dk = fixed_point_gradients(params)
    pb = _normal_projection(params, d_db)
    pk = _normal_projection(params, d_dk)
    if pk == 0:
        raise DegenerateError("k does not move the sink line")
    return abs(pb) / abs(pk)


def preferred_target(params: OrgParams, unit_costs: Tuple[float, float] = (1.0, 1.0)) -> TargetReport:
    cost_b, cost_k = map(float, unit_costs)
    if not cost_b > 0 or not cost_k > 0:
        raise InvalidParameterError(f"unit costs must be > 0, got {unit_costs}")
    if regime(params) is not Regime.SADDLE:
        raise RegimeError("targeting comparison needs a saddle")
    d_db, d_dk = fixed_point_gradients(params)
    e2 = eigen_structure(params).e2
    slope = e2[1] / e2[0]
    # F-intercept shift of the line through x* with fixed slope
    shift_b = (d_db[1] - slope * d_db[0]) / cost_b
    shift_k = (d_dk[1] - slope * d_dk[0]) / cost_k
    target = Target.LEADERS if shift_b > shift_k else Target.FOOT_SOLDIERS
    margin = abs(shift_b - shift_k) / max(abs(shift_b), abs(shift_k))
    return TargetReport(target, margin, shift_b, shift_k)


def _post_strike(params: OrgParams, state: OrgState, l: float, f: float):
    post = OrgState(max(state.L - l, 0.0), max(state.F - f, 0.0), state.t)
    if regime(params) is not Regime.SADDLE:
        return post, None
    fp, eig = fixed_point(params), eigen_structure(params)
    coords = _coords(fp, eig, post)
    tau = DEFAULT_TOL * math.hypot(post.L - fp.L_star, post.F - fp.F_star)
    return post, Classification(_kind(coords, tau), coords)


def _result(cost: CostModel, m: float, l: float, f: float, params=None, state=None) -> AllocationResult:
    post = cls = None
    if params is not None and state is not None:
        post, cls = _post_strike(params, state, l, f)
    return AllocationResult(l, f, m * l + f, cost.cost(l, f), post, cls)


def tangency_allocation(cost: CostModel, m: float, params: Optional[OrgParams] = None,
                        state: Optional[OrgState] = None) -> AllocationResult:
    """Split of the budget maximizing the immediate strength loss ``m*l + f``.

    Lagrange conditions give ``(l/f)**(sigma-1) = m*c2/c1`` on ``cost == B``.
    Passing ``params`` and ``state`` fills in the post-strike fields.
    """
    if not m > 0:
        raise InvalidParameterError(f"m must be > 0, got {m}")
    s = cost.sigma
    ratio = (m * cost.c2 / cost.c1) ** (1.0 / (s - 1.0))
    f = (cost.B / (cost.c1 * ratio ** s + cost.c2)) ** (1.0 / s)
    l = ratio * f
    return _result(cost, m, l, f, params, state)


def golden_section_max(fn, a: float, b: float, tol: float = GOLDEN_TOL, max_iter: int = 200):
    """Maximize a unimodal ``fn`` on ``[a, b]``; returns ``(x, fn(x))``.

    Stops when the bracket is narrower than ``tol``.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = fn(d)
    candidates = [(fc, c), (fd, d), (fn(a), a), (fn(b), b)]
    best_val, best_x = max(candidates, key=lambda v: v[0])
    return best_x, best_val


def sink_feasible_allocation(params: OrgParams, state: OrgState,
                             cost: CostModel) -> Union[AllocationResult, Infeasible]:
    """Affordable strike leaving the organization deepest below the sink line.

    ``d1`` of the post-strike state is affine in ``(l, f)`` with negative
    coefficients (up to clipping at the axes), so the best strike spends the
    whole budget; it is found by golden-section search along the budget curve.
    """
    require_first_quadrant(state)
    if regime(params) is not Regime.SADDLE:
        raise RegimeError("sink-line allocation needs a saddle")
    fp, eig = fixed_point(params), eigen_structure(params)

    def gain(theta):
        l, f = cost.boundary(theta)
        post = OrgState(max(state.L - l, 0.0), max(state.F - f, 0.0))
        return -_coords(fp, eig, post).d1

    theta, best = golden_section_max(gain, 0.0, 0.5 * math.pi)
    l, f = cost.boundary(theta)
    result = _result(cost, params.m, l, f, params, state)
    min_d1 = -best
    if not min_d1 < 0:
        return Infeasible(min_d1, result)
    return result


def compare_strategies(params: OrgParams, state: OrgState, cost: CostModel) -> StrategyComparison:
    require_first_quadrant(state)
    if regime(params) is not Regime.SADDLE:
        raise RegimeError("strategy comparison needs a saddle")
    tangency = tangency_allocation(cost, params.m, params, state)
    feasible = sink_feasible_allocation(params, state, cost)
    fp, eig = fixed_point(params), eigen_structure(params)
    d1_now = _coords(fp, eig, state).d1
    return StrategyComparison(
        tangency=tangency,
        feasible=feasible,
        already_defeated=d1_now < 0,
        tangency_defeats=tangency.post_classification.kind is Kind.DEFEATED,
        feasible_defeats=isinstance(feasible, AllocationResult),
    )
