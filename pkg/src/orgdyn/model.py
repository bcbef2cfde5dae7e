"""Leader / foot-soldier population model.

The organization is described by two real-valued populations, leaders ``L``
and foot soldiers ``F``, evolving under the affine system

    dL/dt = p*F - d_L*L - b
    dF/dt = r*(m*L + F) - d_F*F - k

with strength ``S = m*L + F``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Tuple

PARAM_NAMES = ("p", "r", "m", "b", "k", "d_L", "d_F")


class OrgDynError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(OrgDynError, ValueError):
    pass


class DomainError(OrgDynError, ValueError):
    pass


class DegenerateError(OrgDynError, ArithmeticError):
    pass


class RegimeError(OrgDynError):
    pass


class LowLeaderWeightWarning(UserWarning):
    pass


@dataclass(frozen=True)
class OrgParams:
    """The seven rates of the model.

    ``p`` promotion, ``r`` recruitment, ``m`` leader weight in strength,
    ``b``/``k`` counter-terrorism removal of leaders / foot soldiers per unit
    time, ``d_L``/``d_F`` internal loss rates.
    """

    p: float
    r: float
    m: float
    b: float = 0.0
    k: float = 0.0
    d_L: float = 0.0
    d_F: float = 0.0

    def __post_init__(self):
        for name in PARAM_NAMES:
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise InvalidParameterError(f"{name} must be a number, got {value!r}") from None
            if value != value or value in (float("inf"), float("-inf")):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.p <= 0:
            raise InvalidParameterError(f"p must be > 0, got {self.p}")
        if self.r <= 0:
            raise InvalidParameterError(f"r must be > 0, got {self.r}")
        if self.m <= 0:
            raise InvalidParameterError(f"m must be > 0, got {self.m}")
        for name in ("b", "k", "d_L", "d_F"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.m <= 1:
            warnings.warn(
                f"leader weight m={self.m} <= 1: leaders count no more than foot soldiers",
                LowLeaderWeightWarning,
                stacklevel=3,
            )

    @classmethod
    def uniform(cls, p, r, m, b=0.0, k=0.0, d=0.0) -> "OrgParams":
        """Same desertion rate for leaders and foot soldiers."""
        return cls(p=p, r=r, m=m, b=b, k=k, d_L=d, d_F=d)

    @property
    def low_leader_weight(self) -> bool:
        return self.m <= 1

    @property
    def is_uniform(self) -> bool:
        return self.d_L == self.d_F

    def with_(self, **changes) -> "OrgParams":
        """Copy with some fields replaced; ``d`` sets both desertion rates."""
        if "d" in changes:
            d = changes.pop("d")
            changes.setdefault("d_L", d)
            changes.setdefault("d_F", d)
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in PARAM_NAMES}


@dataclass(frozen=True)
class OrgState:
    """Population point.  Negative values are allowed for intermediate results."""

    L: float
    F: float
    t: float = 0.0

    @property
    def in_first_quadrant(self) -> bool:
        return self.L >= 0 and self.F >= 0

    def __add__(self, other):
        dL, dF = _pair(other)
        return OrgState(self.L + dL, self.F + dF, self.t)

    def __sub__(self, other):
        dL, dF = _pair(other)
        return OrgState(self.L - dL, self.F - dF, self.t)


def _pair(v) -> Tuple[float, float]:
    if isinstance(v, OrgState):
        return v.L, v.F
    a, b = v
    return float(a), float(b)


def require_first_quadrant(state: OrgState) -> OrgState:
    if not state.in_first_quadrant:
        raise DomainError(f"state must have L >= 0 and F >= 0, got L={state.L}, F={state.F}")
    return state


@dataclass(frozen=True)
class SystemMatrix:
    """Jacobian ``[[a11, a12], [a21, a22]]`` and forcing ``(f1, f2)``."""

    a11: float
    a12: float
    a21: float
    a22: float
    f1: float
    f2: float

    @property
    def trace(self) -> float:
        return self.a11 + self.a22

    @property
    def det(self) -> float:
        return self.a11 * self.a22 - self.a12 * self.a21

    def as_array(self):
        import numpy as np

        return np.array([[self.a11, self.a12], [self.a21, self.a22]])

    def apply(self, L: float, F: float) -> Tuple[float, float]:
        return (self.a11 * L + self.a12 * F + self.f1,
                self.a21 * L + self.a22 * F + self.f2)


def strength(state: OrgState, m: float) -> float:
    return m * state.L + state.F


def derivative(params: OrgParams, state: OrgState) -> Tuple[float, float]:
    """Rates ``(dL/dt, dF/dt)`` at ``state``."""
    L, F = state.L, state.F
    dL = params.p * F - params.d_L * L - params.b
    dF = params.r * (params.m * L + F) - params.d_F * F - params.k
    return dL, dF


def strength_rate(params: OrgParams, state: OrgState) -> float:
    dL, dF = derivative(params, state)
    return params.m * dL + dF


def system_matrix(params: OrgParams) -> SystemMatrix:
    return SystemMatrix(
        a11=-params.d_L,
        a12=params.p,
        a21=params.r * params.m,
        a22=params.r - params.d_F,
        f1=-params.b,
        f2=-params.k,
    )


def promotion_drain_transform(params: OrgParams, mode: str) -> OrgParams:
    """Account for foot soldiers lost to promotion (-p*F in dF/dt).

    ``adjust-rm`` rescales recruitment, r -> r - p and m -> r*m/(r - p), which
    keeps the product r*m.  ``adjust-dF`` instead adds p to the foot-soldier
    loss rate.
    """
    if mode == "adjust-rm":
        if params.r <= params.p:
            raise DomainError(
                f"adjust-rm needs r > p (r={params.r}, p={params.p}); use adjust-dF instead"
            )
        r_new = params.r - params.p
        return replace(params, r=r_new, m=params.r * params.m / r_new)
    if mode == "adjust-dF":
        return replace(params, d_F=params.d_F + params.p)
    raise ValueError(f"unknown mode {mode!r}, expected 'adjust-rm' or 'adjust-dF'")
