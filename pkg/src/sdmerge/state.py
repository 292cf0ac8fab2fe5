"""Traffic states in supply-demand space and their regime algebra."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import DomainError, MalformedStateError
from .fundamental import FundamentalDiagram

# Case boundaries in the merge theorems are measure-zero; equality against the
# capacity must be decided deterministically with a fixed relative tolerance.
REL_TOL = 1e-12


class Regime(enum.Enum):
    CRITICAL = "critical"
    SUC = "suc"  # strictly under-critical: D < S = C
    SOC = "soc"  # strictly over-critical:  S < D = C
    UC = "uc"    # under-critical: S = C
    OC = "oc"    # over-critical:  D = C


@dataclass(frozen=True)
class SDState:
    """A state U = (D, S); every realizable state has max(D, S) = C."""

    demand: float
    supply: float

    @property
    def flux(self) -> float:
        return min(self.demand, self.supply)

    def classify(self, capacity: float) -> Regime:
        tol = REL_TOL * capacity
        d_at_cap = abs(self.demand - capacity) <= tol
        s_at_cap = abs(self.supply - capacity) <= tol
        if self.demand > capacity + tol or self.supply > capacity + tol:
            raise MalformedStateError(
                f"state ({self.demand}, {self.supply}) exceeds capacity {capacity}"
            )
        if self.demand < -tol or self.supply < -tol:
            raise MalformedStateError("negative demand or supply")
        if not (d_at_cap or s_at_cap):
            raise MalformedStateError(
                f"state ({self.demand}, {self.supply}) is off the diagram: "
                f"max(D, S) != C = {capacity}"
            )
        if d_at_cap and s_at_cap:
            return Regime.CRITICAL
        if s_at_cap:
            return Regime.SUC
        return Regime.SOC

    def is_under_critical(self, capacity: float) -> bool:
        return self.classify(capacity) in (Regime.CRITICAL, Regime.SUC)

    def is_over_critical(self, capacity: float) -> bool:
        return self.classify(capacity) in (Regime.CRITICAL, Regime.SOC)

    def density(self, fd: FundamentalDiagram) -> float:
        """Realize the state as the density it maps to on the diagram."""
        regime = self.classify(fd.capacity)
        if regime in (Regime.CRITICAL,):
            return fd.critical_density
        if regime is Regime.SUC:
            return fd.density_from_demand(self.demand)
        return fd.density_from_supply(self.supply)

    def describe(self, capacity: float | None = None) -> dict:
        rec = {"D": self.demand, "S": self.supply}
        if capacity is not None:
            rec["regime"] = self.classify(capacity).value
        return rec


def state_of_density(fd: FundamentalDiagram, rho: float) -> SDState:
    """U(rho) = (D(rho), S(rho))."""
    if not (0.0 <= rho <= fd.rho_jam * (1.0 + 1e-12)):
        raise DomainError(f"density {rho} outside [0, {fd.rho_jam}]")
    return SDState(fd.demand(rho), fd.supply(rho))
