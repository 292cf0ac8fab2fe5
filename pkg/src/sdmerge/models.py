"""Merge distribution schemes: local (discrete) and global (closed-form) fluxes.

The local flux apportions the downstream receiving capacity among the two
upstream sending flows evaluated at junction-adjacent (interior) states; it is
what a Godunov/CTM scheme calls every step. The global flux is the closed-form
solution of the Riemann problem as a function of initial demands and supply.
A scheme is invariant when the two coincide.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedModelError
from .state import SDState


class ModelKind(enum.Enum):
    FAIR = "fair"
    CONSTANT = "constant"
    PRIORITY_INVARIANT = "priority_invariant"
    CONSTANT_INVARIANT = "constant_invariant"
    SCALED_FAIR = "scaled_fair"


_NEEDS_ALPHA = {
    ModelKind.CONSTANT,
    ModelKind.PRIORITY_INVARIANT,
    ModelKind.CONSTANT_INVARIANT,
}


@dataclass(frozen=True)
class FluxTriple:
    """Upstream out-fluxes q1, q2 and downstream in-flux q3 = q1 + q2."""

    q1: float
    q2: float

    @property
    def q3(self) -> float:
        return self.q1 + self.q2

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.q1, self.q2, self.q3)


@dataclass(frozen=True)
class MergeModel:
    kind: ModelKind
    alpha: tuple[float, float] = (0.5, 0.5)
    gamma: float = 1.0

    def __post_init__(self):
        a1, a2 = self.alpha
        if self.kind in _NEEDS_ALPHA:
            if not (0.0 <= a1 <= 1.0 and 0.0 <= a2 <= 1.0):
                raise DomainError("distribution proportions must lie in [0, 1]")
            if a1 + a2 != 1.0:
                raise DomainError("distribution proportions must sum to 1")
        if not (0.0 < self.gamma <= 1.0):
            raise DomainError("supply-utilization factor must lie in (0, 1]")

    @property
    def has_global_flux(self) -> bool:
        return self.kind is not ModelKind.SCALED_FAIR

    # -- local, discrete flux ----------------------------------------------

    def local_flux(
        self,
        up1: SDState,
        up2: SDState,
        down: SDState,
        down_capacity: float,
    ) -> FluxTriple:
        """Junction fluxes from junction-adjacent states."""
        d1, d2 = up1.demand, up2.demand
        s3 = down.supply
        return self.local_flux_from_values(d1, d2, s3, down_capacity)

    def local_flux_from_values(
        self, d1: float, d2: float, s3: float, c3: float
    ) -> FluxTriple:
        a1, a2 = self.alpha
        k = self.kind
        if k in (ModelKind.FAIR, ModelKind.SCALED_FAIR):
            s_eff = s3 if k is ModelKind.FAIR else self.gamma * s3
            total = d1 + d2
            factor = 1.0 if total <= 0.0 else min(1.0, s_eff / total)
            return FluxTriple(factor * d1, factor * d2)
        if k is ModelKind.CONSTANT:
            return FluxTriple(min(d1, a1 * s3), min(d2, a2 * s3))
        if k is ModelKind.PRIORITY_INVARIANT:
            return FluxTriple(
                min(d1, max(s3 - d2, a1 * s3)),
                min(d2, max(s3 - d1, a2 * s3)),
            )
        if k is ModelKind.CONSTANT_INVARIANT:
            return FluxTriple(
                min(d1, a1 * c3, max(s3 - d2, a1 * s3)),
                min(d2, a2 * c3, max(s3 - d1, a2 * s3)),
            )
        raise UnsupportedModelError(f"no local flux for {k}")

    # -- global, continuous flux -------------------------------------------

    def global_flux(
        self,
        d1: float,
        d2: float,
        s3: float,
        c1: float,
        c2: float,
        c3: float,
    ) -> FluxTriple:
        """Closed-form Riemann boundary fluxes from initial demands/supply."""
        for value, cap, name in ((d1, c1, "D1"), (d2, c2, "D2"), (s3, c3, "S3")):
            if not (0.0 <= value <= cap * (1.0 + 1e-12)):
                raise DomainError(f"{name}={value} outside [0, {cap}]")
        a1, a2 = self.alpha
        k = self.kind
        if k is ModelKind.FAIR:
            b1 = c1 / (c1 + c2)
            b2 = c2 / (c1 + c2)
            return FluxTriple(
                min(d1, max(s3 - d2, b1 * s3)),
                min(d2, max(s3 - d1, b2 * s3)),
            )
        if k is ModelKind.PRIORITY_INVARIANT:
            return FluxTriple(
                min(d1, max(s3 - d2, a1 * s3)),
                min(d2, max(s3 - d1, a2 * s3)),
            )
        if k in (ModelKind.CONSTANT, ModelKind.CONSTANT_INVARIANT):
            return FluxTriple(
                min(d1, a1 * c3, max(s3 - d2, a1 * s3)),
                min(d2, a2 * c3, max(s3 - d1, a2 * s3)),
            )
        raise UnsupportedModelError(
            "the scaled fair model is simulation-only and has no closed form"
        )

    def describe(self) -> dict:
        rec: dict = {"model": self.kind.value}
        if self.kind in _NEEDS_ALPHA:
            rec["alpha"] = list(self.alpha)
        if self.kind is ModelKind.SCALED_FAIR:
            rec["gamma"] = self.gamma
        return rec


def optimal_total_flux(d1: float, d2: float, s3: float) -> float:
    """The entropy-maximizing total merge flux min(D1 + D2, S3)."""
    if d1 < 0 or d2 < 0 or s3 < 0:
        raise DomainError("demands and supply must be nonnegative")
    return min(d1 + d2, s3)


@dataclass(frozen=True)
class InvarianceResult:
    invariant: bool
    witness: tuple[float, float, float] | None = None
    max_gap: float = 0.0


def check_invariance(
    model: MergeModel,
    capacities: tuple[float, float, float],
    samples: int = 10_000,
    seed: int = 0,
    tol: float = 1e-12,
) -> InvarianceResult:
    """Compare local and global fluxes on seeded random admissible triples.

    The local flux is evaluated at states whose demands/supply equal the
    sampled (D1, D2, S3); the first disagreement beyond ``tol`` is reported
    as a witness.
    """
    if not model.has_global_flux:
        raise UnsupportedModelError("invariance is defined via the global flux")
    c1, c2, c3 = capacities
    rng = np.random.default_rng(seed)
    d1s = rng.uniform(0.0, c1, samples)
    d2s = rng.uniform(0.0, c2, samples)
    s3s = rng.uniform(0.0, c3, samples)
    worst = 0.0
    witness = None
    for d1, d2, s3 in zip(d1s, d2s, s3s):
        loc = model.local_flux_from_values(d1, d2, s3, c3)
        glo = model.global_flux(d1, d2, s3, c1, c2, c3)
        gap = max(abs(loc.q1 - glo.q1), abs(loc.q2 - glo.q2))
        if gap > worst:
            worst = gap
            if gap > tol and witness is None:
                witness = (float(d1), float(d2), float(s3))
    return InvarianceResult(invariant=worst <= tol, witness=witness, max_gap=worst)


def is_invariant(
    model: MergeModel,
    capacities: tuple[float, float, float],
    samples: int = 10_000,
    seed: int = 0,
) -> bool:
    return check_invariance(model, capacities, samples, seed).invariant


def model_from_spec(spec: dict) -> MergeModel:
    """Build a model from its config record {model, alpha?, gamma?}."""
    try:
        kind = ModelKind(spec["model"])
    except (KeyError, ValueError) as exc:
        raise DomainError(f"unknown merge model in {spec!r}") from exc
    alpha = tuple(spec.get("alpha", (0.5, 0.5)))
    if len(alpha) != 2:
        raise DomainError("alpha must have exactly two entries")
    gamma = float(spec.get("gamma", 1.0))
    return MergeModel(kind=kind, alpha=alpha, gamma=gamma)
