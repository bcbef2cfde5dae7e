"""Trajectories: exact eigen-decomposition solution and an RK4 cross-check.

Both methods stop as soon as ``L`` or ``F`` drops below zero; the model is
meaningless past that point and an organization without foot soldiers (or
leaders) is treated as collapsed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from .analysis import (
    Classification,
    Regime,
    _coords,
    classify,
    eigen_structure,
    fixed_point,
    regime,
)
from .model import (
    DegenerateError,
    OrgDynError,
    OrgParams,
    OrgState,
    derivative,
    system_matrix,
)

DEFAULT_DT = 0.01
DEFAULT_T_MAX = 100.0
DEFAULT_SAMPLE_EVERY = 10
STATIONARY_TOL = 1e-9


class Method(str, Enum):
    CLOSED_FORM = "closed"
    RK4 = "rk4"


class Outcome(str, Enum):
    COLLAPSED = "Collapsed"
    GROWING_AT_HORIZON = "GrowingAtHorizon"
    FIXED_POINT_REACHED = "FixedPointReached"
    # horizon reached while still heading for collapse (slow sinks, b = k = 0)
    DECLINING_AT_HORIZON = "DecliningAtHorizon"


class StepSizeError(OrgDynError, ValueError):
    pass


@dataclass(frozen=True)
class SimOptions:
    method: Method = Method.CLOSED_FORM
    dt: float = DEFAULT_DT
    t_max: float = DEFAULT_T_MAX
    sample_every: int = DEFAULT_SAMPLE_EVERY

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if not self.dt > 0:
            raise StepSizeError(f"dt must be > 0, got {self.dt}")
        if not self.t_max > 0:
            raise StepSizeError(f"t_max must be > 0, got {self.t_max}")
        if self.dt > self.t_max:
            raise StepSizeError(f"dt={self.dt} exceeds t_max={self.t_max}")
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise StepSizeError(f"sample_every must be a positive integer, got {self.sample_every}")


@dataclass
class Trajectory:
    times: np.ndarray
    L: np.ndarray
    F: np.ndarray
    m: float
    outcome: Outcome
    method: Method
    t_end: Optional[float] = None
    classification: Optional[Classification] = None

    @property
    def S(self) -> np.ndarray:
        return self.m * self.L + self.F

    @property
    def samples(self) -> List[Tuple[float, float, float, float]]:
        S = self.S
        return [(float(t), float(l), float(f), float(s))
                for t, l, f, s in zip(self.times, self.L, self.F, S)]

    @property
    def final(self) -> OrgState:
        return OrgState(float(self.L[-1]), float(self.F[-1]), float(self.times[-1]))

    def __len__(self):
        return len(self.times)

    def rescaled(self) -> dict:
        """Each of L, F, S divided by its maximum over the emitted window."""
        out = {}
        for name, series in (("L", self.L), ("F", self.F), ("S", self.S)):
            peak = np.max(np.abs(series))
            out[name] = series / peak if peak > 0 else series.copy()
        return out


@dataclass(frozen=True)
class VectorFieldGrid:
    bounds: Tuple[float, float, float, float]
    resolution: Tuple[int, int]
    points: np.ndarray = field(repr=False)
    arrows: np.ndarray = field(repr=False)


def _time_grid(dt: float, t_max: float) -> np.ndarray:
    n = int(math.ceil(t_max / dt - 1e-9))
    t = np.arange(n + 1, dtype=float) * dt
    t[-1] = t_max
    return t


def _eigen_parts(params: OrgParams):
    if regime(params) is Regime.DEGENERATE:
        raise DegenerateError("closed form needs an isolated fixed point")
    fp = fixed_point(params)
    eig = eigen_structure(params)
    return fp, eig


def _closed_form_arrays(fp, eig, c1, c2, t):
    g1 = c1 * np.exp(eig.lambda1 * t)
    g2 = c2 * np.exp(eig.lambda2 * t)
    L = fp.L_star + g1 * eig.e1[0] + g2 * eig.e2[0]
    F = fp.F_star + g1 * eig.e1[1] + g2 * eig.e2[1]
    return L, F


def closed_form_state(params: OrgParams, state0: OrgState, t: float) -> OrgState:
    """Exact solution ``x* + c1*exp(l1 t)*e1 + c2*exp(l2 t)*e2`` at time ``t``.

    ``t`` is measured from ``state0.t``.
    """
    fp, eig = _eigen_parts(params)
    c = _coords(fp, eig, state0)
    g1 = c.d1 * math.exp(eig.lambda1 * t)
    g2 = c.d2 * math.exp(eig.lambda2 * t)
    return OrgState(fp.L_star + g1 * eig.e1[0] + g2 * eig.e2[0],
                    fp.F_star + g1 * eig.e1[1] + g2 * eig.e2[1],
                    state0.t + t)


def _scale(params: OrgParams, state0: OrgState) -> float:
    s = max(1.0, abs(state0.L), abs(state0.F))
    if regime(params) is not Regime.DEGENERATE:
        fp = fixed_point(params)
        s = max(s, abs(fp.L_star), abs(fp.F_star))
    return s


def _horizon_outcome(params: OrgParams, L_end: float, F_end: float) -> Outcome:
    reg = regime(params)
    if reg is Regime.SADDLE:
        c = _coords(fixed_point(params), eigen_structure(params), OrgState(L_end, F_end))
        return Outcome.GROWING_AT_HORIZON if c.d1 > 0 else Outcome.DECLINING_AT_HORIZON
    if reg is Regime.SINK_COLLAPSE:
        return Outcome.DECLINING_AT_HORIZON
    dL, dF = derivative(params, OrgState(L_end, F_end))
    return Outcome.GROWING_AT_HORIZON if params.m * dL + dF > 0 else Outcome.DECLINING_AT_HORIZON


def _stationary(params, state0, L, F) -> bool:
    if regime(params) is Regime.DEGENERATE:
        return False
    fp = fixed_point(params)
    tol = STATIONARY_TOL * _scale(params, state0)
    dev = np.hypot(L - fp.L_star, F - fp.F_star)
    return bool(np.all(dev <= tol))


def _assemble(params, t, L, F, keep_idx, crossing, method, state0) -> Trajectory:
    """Pick sampled rows, append the crossing point, decide the outcome."""
    times = list(t[keep_idx])
    Ls = list(L[keep_idx])
    Fs = list(F[keep_idx])
    if crossing is not None:
        tc, Lc, Fc = crossing
        while times and times[-1] >= tc:
            times.pop(); Ls.pop(); Fs.pop()
        times.append(tc); Ls.append(Lc); Fs.append(Fc)
        outcome, t_end = Outcome.COLLAPSED, tc
    else:
        if _stationary(params, state0, L, F):
            outcome = Outcome.FIXED_POINT_REACHED
        else:
            outcome = _horizon_outcome(params, float(L[-1]), float(F[-1]))
        t_end = None
    return Trajectory(
        times=np.asarray(times, dtype=float) + state0.t,
        L=np.asarray(Ls, dtype=float),
        F=np.asarray(Fs, dtype=float),
        m=params.m,
        outcome=outcome,
        method=method,
        t_end=None if t_end is None else t_end + state0.t,
    )


def _sample_indices(n_last: int, every: int) -> np.ndarray:
    idx = list(range(0, n_last + 1, every))
    if idx[-1] != n_last:
        idx.append(n_last)
    return np.asarray(idx, dtype=int)


def _clamp_crossing(Lc: float, Fc: float, which_L: bool) -> Tuple[float, float]:
    if which_L:
        return 0.0, max(Fc, 0.0)
    return max(Lc, 0.0), 0.0


def _simulate_closed(params: OrgParams, state0: OrgState, opts: SimOptions) -> Trajectory:
    fp, eig = _eigen_parts(params)
    c = _coords(fp, eig, state0)
    t = _time_grid(opts.dt, opts.t_max)
    L, F = _closed_form_arrays(fp, eig, c.d1, c.d2, t)
    neg = np.flatnonzero((L < 0) | (F < 0))
    crossing = None
    last = len(t) - 1
    if neg.size:
        j = int(neg[0])
        if j == 0:
            raise OrgDynError(f"initial state outside the first quadrant: {state0}")

        def g(s):
            a, b = _closed_form_arrays(fp, eig, c.d1, c.d2, np.array([s]))
            return min(a[0], b[0])

        tc = brentq(g, t[j - 1], t[j], xtol=1e-14, rtol=4 * np.finfo(float).eps)
        Lc, Fc = _closed_form_arrays(fp, eig, c.d1, c.d2, np.array([tc]))
        Lc, Fc = float(Lc[0]), float(Fc[0])
        crossing = (float(tc),) + _clamp_crossing(Lc, Fc, Lc <= Fc)
        last = j - 1
    keep = _sample_indices(last, int(opts.sample_every))
    return _assemble(params, t[: last + 1], L[: last + 1], F[: last + 1],
                     keep, crossing, Method.CLOSED_FORM, state0)


def integrate_rk4(params: OrgParams, state0: OrgState, dt: float = DEFAULT_DT,
                  t_max: float = DEFAULT_T_MAX,
                  sample_every: int = DEFAULT_SAMPLE_EVERY) -> Trajectory:
    """Classical fourth-order Runge-Kutta with axis-crossing termination.

    The crossing time is located by linear interpolation inside the step in
    which ``L`` or ``F`` first turns negative.
    """
    opts = SimOptions(Method.RK4, dt, t_max, sample_every)
    A = system_matrix(params)
    a11, a12, a21, a22, f1, f2 = A.a11, A.a12, A.a21, A.a22, A.f1, A.f2

    def rhs(x, y):
        return a11 * x + a12 * y + f1, a21 * x + a22 * y + f2

    t = _time_grid(opts.dt, opts.t_max)
    n = len(t)
    L = np.empty(n)
    F = np.empty(n)
    x, y = state0.L, state0.F
    if x < 0 or y < 0:
        raise OrgDynError(f"initial state outside the first quadrant: {state0}")
    L[0], F[0] = x, y
    crossing = None
    last = n - 1
    for j in range(1, n):
        h = t[j] - t[j - 1]
        k1x, k1y = rhs(x, y)
        k2x, k2y = rhs(x + 0.5 * h * k1x, y + 0.5 * h * k1y)
        k3x, k3y = rhs(x + 0.5 * h * k2x, y + 0.5 * h * k2y)
        k4x, k4y = rhs(x + h * k3x, y + h * k3y)
        nx = x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        ny = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        if nx < 0 or ny < 0:
            aL = x / (x - nx) if nx < 0 else math.inf
            aF = y / (y - ny) if ny < 0 else math.inf
            a = min(aL, aF)
            Lc = x + a * (nx - x)
            Fc = y + a * (ny - y)
            crossing = (float(t[j - 1] + a * h),) + _clamp_crossing(Lc, Fc, aL <= aF)
            last = j - 1
            break
        x, y = nx, ny
        L[j], F[j] = x, y
    keep = _sample_indices(last, int(opts.sample_every))
    return _assemble(params, t[: last + 1], L[: last + 1], F[: last + 1],
                     keep, crossing, Method.RK4, state0)


def simulate(params: OrgParams, state0: OrgState, opts: Optional[SimOptions] = None) -> Trajectory:
    opts = opts or SimOptions()
    if opts.method is Method.RK4:
        return integrate_rk4(params, state0, opts.dt, opts.t_max, opts.sample_every)
    return _simulate_closed(params, state0, opts)


def vector_field(params: OrgParams, bounds: Sequence[float], resolution: Sequence[int]) -> VectorFieldGrid:
    """Rates of change evaluated at the centers of an ``nL x nF`` grid of cells."""
    L_min, L_max, F_min, F_max = map(float, bounds)
    nL, nF = map(int, resolution)
    if not (L_max > L_min and F_max > F_min):
        raise ValueError(f"degenerate bounds {tuple(bounds)}")
    if nL < 2 or nF < 2:
        raise ValueError(f"resolution must be at least 2x2, got {nL}x{nF}")
    wL = (L_max - L_min) / nL
    wF = (F_max - F_min) / nF
    points = np.empty((nF * nL, 2))
    arrows = np.empty((nF * nL, 2))
    i = 0
    for jf in range(nF):
        for jl in range(nL):
            s = OrgState(L_min + (jl + 0.5) * wL, F_min + (jf + 0.5) * wF)
            points[i] = s.L, s.F
            arrows[i] = derivative(params, s)
            i += 1
    return VectorFieldGrid((L_min, L_max, F_min, F_max), (nL, nF), points, arrows)


class OrbitErrors(OrgDynError):
    def __init__(self, errors):
        self.errors = errors
        lines = "; ".join(f"start {i}: {e}" for i, e in errors)
        super().__init__(f"{len(errors)} orbit(s) failed: {lines}")


def sample_orbits(params: OrgParams, starts: Sequence[OrgState],
                  opts: Optional[SimOptions] = None) -> List[Trajectory]:
    """One trajectory per start, tagged with the start's classification.

    Classification is only defined around a saddle; in other regimes the tag
    is left as ``None`` (every orbit collapses there).
    """
    if not starts:
        raise ValueError("no starting states given")
    saddle = regime(params) is Regime.SADDLE
    out, errors = [], []
    for i, s in enumerate(starts):
        try:
            traj = simulate(params, s, opts)
            if saddle:
                traj.classification = classify(params, s)
            out.append(traj)
        except OrgDynError as e:
            errors.append((i, e))
    if errors:
        raise OrbitErrors(errors)
    return out
