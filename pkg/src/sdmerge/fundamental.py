"""Unimodal flow-density relations and their demand/supply decomposition.

Four diagram families are supported: the two del Castillo maximum-sensitivity
curves used for the mainline (2-lane) and on-ramp (1-lane) experiments, plus
triangular and Greenshields diagrams whose closed-form inverses make them
convenient for exact test oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InfeasibleFlowError

# exp() overflows past ~709; the del Castillo inner exponential saturates the
# bracket to 1 long before that, so clamping is exact in double precision.
_EXP_CAP = 700.0

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    """Golden-section maximization of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _del_castillo_flow(rho: float, lanes: float, rho_j: float) -> float:
    # Q(rho) = lanes/2 * rho * (1 - exp(1 - exp((rho_j/rho - 1)/4)))
    if rho < 1e-12:
        return 0.0
    g = 0.25 * (rho_j / rho - 1.0)
    if g > _EXP_CAP:
        bracket = 1.0
    else:
        e = math.exp(g)
        bracket = -math.expm1(1.0 - e) if e < _EXP_CAP else 1.0
    return 0.5 * lanes * rho * bracket


def _del_castillo_dflow(rho: float, lanes: float, rho_j: float) -> float:
    if rho < 1e-12:
        return 0.5 * lanes
    g = 0.25 * (rho_j / rho - 1.0)
    if g > _EXP_CAP:
        return 0.5 * lanes
    e = math.exp(g)
    if e > _EXP_CAP:
        return 0.5 * lanes
    f = math.exp(1.0 - e)
    # d/drho [rho*(1-f)] = (1-f) - f*e*rho_j/(4*rho)
    return 0.5 * lanes * ((1.0 - f) - f * e * rho_j / (4.0 * rho))


@dataclass(frozen=True)
class FundamentalDiagram:
    """Immutable flow-density relation with cached capacity point.

    Use the class methods to construct instances; the critical density and
    capacity are located once at construction and reused by every regime
    test downstream.
    """

    family: str
    rho_jam: float
    free_flow_speed: float
    params: tuple[float, ...] = ()
    critical_density: float = field(default=0.0)
    capacity: float = field(default=0.0)

    # -- constructors ------------------------------------------------------

    @classmethod
    def del_castillo_mainline(cls) -> "FundamentalDiagram":
        fd = cls(family="delcastillo_mainline", rho_jam=2.0, free_flow_speed=1.0)
        return fd._with_capacity_point()

    @classmethod
    def del_castillo_ramp(cls) -> "FundamentalDiagram":
        fd = cls(family="delcastillo_ramp", rho_jam=1.0, free_flow_speed=0.5)
        return fd._with_capacity_point()

    @classmethod
    def triangular(cls, v_f: float, w: float, rho_j: float) -> "FundamentalDiagram":
        if v_f <= 0 or w <= 0 or rho_j <= 0:
            raise DomainError("triangular parameters must be positive")
        rho_c = w * rho_j / (v_f + w)
        return cls(
            family="triangular",
            rho_jam=rho_j,
            free_flow_speed=v_f,
            params=(v_f, w, rho_j),
            critical_density=rho_c,
            capacity=v_f * rho_c,
        )

    @classmethod
    def greenshields(cls, v_f: float, rho_j: float) -> "FundamentalDiagram":
        if v_f <= 0 or rho_j <= 0:
            raise DomainError("greenshields parameters must be positive")
        return cls(
            family="greenshields",
            rho_jam=rho_j,
            free_flow_speed=v_f,
            params=(v_f, rho_j),
            critical_density=0.5 * rho_j,
            capacity=0.25 * v_f * rho_j,
        )

    def _with_capacity_point(self) -> "FundamentalDiagram":
        rho_c, cap = _golden_max(self._raw_flow, 0.0, self.rho_jam)
        object.__setattr__(self, "critical_density", rho_c)
        object.__setattr__(self, "capacity", cap)
        return self

    # -- core evaluations --------------------------------------------------

    def _raw_flow(self, rho: float) -> float:
        if self.family == "delcastillo_mainline":
            return _del_castillo_flow(rho, lanes=2.0, rho_j=2.0)
        if self.family == "delcastillo_ramp":
            return _del_castillo_flow(rho, lanes=1.0, rho_j=1.0)
        if self.family == "triangular":
            v_f, w, rho_j = self.params
            return min(v_f * rho, w * (rho_j - rho))
        if self.family == "greenshields":
            v_f, rho_j = self.params
            return v_f * rho * (1.0 - rho / rho_j)
        raise DomainError(f"unknown diagram family {self.family!r}")

    def _check_density(self, rho: float) -> None:
        if not (0.0 <= rho <= self.rho_jam * (1.0 + 1e-12)):
            raise DomainError(
                f"density {rho} outside [0, {self.rho_jam}] for {self.family}"
            )

    def flow(self, rho: float) -> float:
        """Q(rho); the rho -> 0 limit is 0 by continuity."""
        self._check_density(rho)
        return self._raw_flow(min(rho, self.rho_jam))

    def demand(self, rho: float) -> float:
        """Maximum sending flow D(rho) = Q(min(rho, rho_c))."""
        self._check_density(rho)
        return self.capacity if rho >= self.critical_density else self._raw_flow(rho)

    def supply(self, rho: float) -> float:
        """Maximum receiving flow S(rho) = Q(max(rho, rho_c))."""
        self._check_density(rho)
        if rho <= self.critical_density:
            return self.capacity
        return self._raw_flow(min(rho, self.rho_jam))

    def flow_array(self, rho: np.ndarray) -> np.ndarray:
        """Vectorized Q(rho) for cell arrays (no domain checks)."""
        rho = np.asarray(rho, dtype=float)
        if self.family in ("delcastillo_mainline", "delcastillo_ramp"):
            lanes = 2.0 if self.family == "delcastillo_mainline" else 1.0
            safe = np.maximum(rho, 1e-12)
            g = np.minimum(0.25 * (self.rho_jam / safe - 1.0), _EXP_CAP)
            e = np.exp(g)
            bracket = np.where(e < _EXP_CAP, -np.expm1(1.0 - np.minimum(e, _EXP_CAP)), 1.0)
            return np.where(rho < 1e-12, 0.0, 0.5 * lanes * rho * bracket)
        if self.family == "triangular":
            v_f, w, rho_j = self.params
            return np.minimum(v_f * rho, w * (rho_j - rho))
        v_f, rho_j = self.params
        return v_f * rho * (1.0 - rho / rho_j)

    def demand_array(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return np.where(
            rho >= self.critical_density, self.capacity, self.flow_array(rho)
        )

    def supply_array(self, rho: np.ndarray) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        return np.where(
            rho <= self.critical_density, self.capacity, self.flow_array(rho)
        )

    # -- branch inverses ---------------------------------------------------

    def density_from_demand(self, d: float) -> float:
        """Unique rho in [0, rho_c] with Q(rho) = d (under-critical branch)."""
        if d < 0.0 or d > self.capacity * (1.0 + 1e-12):
            raise InfeasibleFlowError(f"demand {d} exceeds capacity {self.capacity}")
        d = min(d, self.capacity)
        return self._bisect(d, 0.0, self.critical_density, increasing=True)

    def density_from_supply(self, s: float) -> float:
        """Unique rho in [rho_c, rho_j] with Q(rho) = s (over-critical branch)."""
        if s < 0.0 or s > self.capacity * (1.0 + 1e-12):
            raise InfeasibleFlowError(f"supply {s} exceeds capacity {self.capacity}")
        s = min(s, self.capacity)
        return self._bisect(s, self.critical_density, self.rho_jam, increasing=False)

    def _bisect(self, target: float, lo: float, hi: float, increasing: bool) -> float:
        tol = 1e-12 * self.capacity
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            v = self._raw_flow(mid)
            if abs(v - target) <= tol and hi - lo < 1e-12 * self.rho_jam:
                return mid
            if (v < target) == increasing:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    # -- characteristic speed ----------------------------------------------

    def char_speed(self, rho: float) -> float:
        """dQ/drho; analytic for every built-in family."""
        if self.family == "delcastillo_mainline":
            return _del_castillo_dflow(rho, lanes=2.0, rho_j=2.0)
        if self.family == "delcastillo_ramp":
            return _del_castillo_dflow(rho, lanes=1.0, rho_j=1.0)
        if self.family == "triangular":
            v_f, w, _ = self.params
            return v_f if rho < self.critical_density else -w
        if self.family == "greenshields":
            v_f, rho_j = self.params
            return v_f * (1.0 - 2.0 * rho / rho_j)
        raise DomainError(f"unknown diagram family {self.family!r}")

    def locate_capacity(self) -> tuple[float, float]:
        return self.critical_density, self.capacity

    # Wave classification assumes concavity; all built-in families qualify.
    @property
    def is_concave(self) -> bool:
        return self.family in (
            "delcastillo_mainline",
            "delcastillo_ramp",
            "triangular",
            "greenshields",
        )

    def describe(self) -> dict:
        return {
            "family": self.family,
            "params": list(self.params),
            "capacity": self.capacity,
            "critical_density": self.critical_density,
            "jam_density": self.rho_jam,
            "free_flow_speed": self.free_flow_speed,
        }


def diagram_from_spec(family: str, params: list[float] | None = None) -> FundamentalDiagram:
    """Build a diagram from its config-file tag and parameter list."""
    params = params or []
    if family == "delcastillo_mainline":
        return FundamentalDiagram.del_castillo_mainline()
    if family == "delcastillo_ramp":
        return FundamentalDiagram.del_castillo_ramp()
    if family == "triangular":
        if len(params) != 3:
            raise DomainError("triangular requires params: v_f, w, rho_j")
        return FundamentalDiagram.triangular(*params)
    if family == "greenshields":
        if len(params) != 2:
            raise DomainError("greenshields requires params: v_f, rho_j")
        return FundamentalDiagram.greenshields(*params)
    raise DomainError(f"unknown diagram family {family!r}")
