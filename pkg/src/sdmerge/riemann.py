"""Exact Riemann solutions at a two-to-one merge.

The solution of the merge Riemann problem consists of boundary fluxes,
stationary states (the states prevailing next to the junction as t -> oo),
interior states (junction-layer states occupying one cell in discretizations),
and the kinematic wave connecting each link's initial state to its stationary
state. Fluxes come from the closed-form theorems; an independent brute-force
fixed-point search is provided to certify them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import (
    InadmissibleFluxError,
    OracleFailureError,
    UnsupportedDiagramError,
    UnsupportedModelError,
)
from .fundamental import FundamentalDiagram
from .models import FluxTriple, MergeModel, ModelKind
from .state import REL_TOL, Regime, SDState


class Side(enum.Enum):
    UPSTREAM = "upstream"
    DOWNSTREAM = "downstream"


# ---------------------------------------------------------------------------
# Kinematic waves
# ---------------------------------------------------------------------------

class WaveKind(enum.Enum):
    NONE = "none"
    SHOCK = "shock"
    RAREFACTION = "rarefaction"


@dataclass(frozen=True)
class WaveFan:
    kind: WaveKind
    rho_left: float
    rho_right: float
    speed_lo: float = 0.0
    speed_hi: float = 0.0

    @property
    def speed(self) -> float:
        return self.speed_lo

    def describe(self) -> dict:
        rec = {
            "kind": self.kind.value,
            "rho_left": self.rho_left,
            "rho_right": self.rho_right,
        }
        if self.kind is WaveKind.SHOCK:
            rec["speed"] = self.speed_lo
        elif self.kind is WaveKind.RAREFACTION:
            rec["speed_lo"] = self.speed_lo
            rec["speed_hi"] = self.speed_hi
        return rec


def classify_wave(fd: FundamentalDiagram, rho_left: float, rho_right: float) -> WaveFan:
    """LWR wave between two densities for a concave diagram.

    For concave Q an increasing jump is compressive (shock, Rankine-Hugoniot
    speed) and a decreasing jump opens a rarefaction fan spanning the
    characteristic speeds of its edge states.
    """
    if not fd.is_concave:
        raise UnsupportedDiagramError(
            "wave classification requires a concave fundamental diagram"
        )
    if abs(rho_left - rho_right) <= 1e-10 * fd.rho_jam:
        return WaveFan(WaveKind.NONE, rho_left, rho_right)
    if rho_left < rho_right:
        speed = (fd.flow(rho_right) - fd.flow(rho_left)) / (rho_right - rho_left)
        return WaveFan(WaveKind.SHOCK, rho_left, rho_right, speed, speed)
    lo = fd.char_speed(rho_left)
    hi = fd.char_speed(rho_right)
    return WaveFan(WaveKind.RAREFACTION, rho_left, rho_right, lo, hi)


# ---------------------------------------------------------------------------
# Stationary / interior admissibility
# ---------------------------------------------------------------------------

def stationary_from_flux(
    q: float, d_init: float, s_init: float, capacity: float, side: Side
) -> SDState:
    """Unique stationary state carrying flux q next to the junction.

    Upstream the flux is bounded by the initial demand; it equals the demand
    exactly when the link stays under-critical, otherwise the link queues up
    and the stationary state is over-critical with supply q. Downstream is
    the mirror image in the supply.
    """
    tol = REL_TOL * capacity
    if side is Side.UPSTREAM:
        if q > d_init + tol:
            raise InadmissibleFluxError(f"out-flux {q} exceeds demand {d_init}")
        if q >= d_init - tol:
            return SDState(d_init, capacity)
        return SDState(capacity, q)
    if q > s_init + tol:
        raise InadmissibleFluxError(f"in-flux {q} exceeds supply {s_init}")
    if q >= s_init - tol:
        return SDState(capacity, s_init)
    return SDState(q, capacity)


def check_admissible_stationary(
    u_stat: SDState, u_init: SDState, capacity: float, side: Side
) -> bool:
    tol = REL_TOL * capacity
    if side is Side.UPSTREAM:
        if abs(u_stat.supply - capacity) <= tol and abs(u_stat.demand - u_init.demand) <= tol:
            return True  # (D_i, C_i)
        if abs(u_stat.demand - capacity) <= tol and u_stat.supply < u_init.demand + tol:
            return True  # (C_i, S^-) with S^- < D_i
        return False
    if abs(u_stat.demand - capacity) <= tol and abs(u_stat.supply - u_init.supply) <= tol:
        return True  # (C, S)
    if abs(u_stat.supply - capacity) <= tol and u_stat.demand < u_init.supply + tol:
        return True  # (D^+, C) with D^+ < S
    return False


def check_admissible_interior(
    u_int: SDState, u_stat: SDState, capacity: float, side: Side, tol: float | None = None
) -> bool:
    """Membership in the admissible interior set, within an absolute `tol`.

    The default tolerance suits exact states; pass a looser one when the
    candidate interior state is measured from a discretized solution.
    """
    if tol is None:
        tol = REL_TOL * capacity
    regime = u_stat.classify(capacity)
    if side is Side.UPSTREAM:
        if regime is Regime.SOC:
            return (
                abs(u_int.demand - u_stat.demand) <= tol
                and abs(u_int.supply - u_stat.supply) <= tol
            )
        return u_int.supply >= u_stat.demand - tol
    if regime is Regime.SUC:
        return (
            abs(u_int.demand - u_stat.demand) <= tol
            and abs(u_int.supply - u_stat.supply) <= tol
        )
    return u_int.demand >= u_stat.supply - tol


# ---------------------------------------------------------------------------
# Riemann problem and solution containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiemannProblem:
    model: MergeModel
    fd1: FundamentalDiagram
    fd2: FundamentalDiagram
    fd3: FundamentalDiagram
    u1: SDState
    u2: SDState
    u3: SDState

    def __post_init__(self):
        self.u1.classify(self.fd1.capacity)
        self.u2.classify(self.fd2.capacity)
        self.u3.classify(self.fd3.capacity)

    @property
    def capacities(self) -> tuple[float, float, float]:
        return (self.fd1.capacity, self.fd2.capacity, self.fd3.capacity)


@dataclass(frozen=True)
class LinkSolution:
    stationary: SDState
    interior: SDState
    interior_unique: bool
    wave: WaveFan


@dataclass(frozen=True)
class RiemannSolution:
    fluxes: FluxTriple
    region: str
    link1: LinkSolution
    link2: LinkSolution
    link3: LinkSolution

    @property
    def links(self) -> tuple[LinkSolution, LinkSolution, LinkSolution]:
        return (self.link1, self.link2, self.link3)

    def describe(self, problem: RiemannProblem) -> dict:
        fds = (problem.fd1, problem.fd2, problem.fd3)
        inits = (problem.u1, problem.u2, problem.u3)
        rec: dict = {
            "fluxes": {"q1": self.fluxes.q1, "q2": self.fluxes.q2, "q3": self.fluxes.q3},
            "region": self.region,
            "links": [],
        }
        for fd, u0, sol in zip(fds, inits, self.links):
            rec["links"].append(
                {
                    "initial": u0.describe(fd.capacity),
                    "stationary": sol.stationary.describe(fd.capacity),
                    "stationary_density": sol.stationary.density(fd),
                    "interior": sol.interior.describe(),
                    "interior_unique": sol.interior_unique,
                    "wave": sol.wave.describe(),
                }
            )
        return rec


# ---------------------------------------------------------------------------
# Closed-form solver
# ---------------------------------------------------------------------------

def _region_label(model: MergeModel, d1, d2, s3, c1, c2, c3, tol) -> str:
    """Theorem case label; ties go to the lower-numbered case."""
    kind = model.kind
    if kind is ModelKind.FAIR:
        b1, b2 = c1 / (c1 + c2), c2 / (c1 + c2)
        if d1 + d2 < s3 - tol:
            return "fair-1"
        if d1 + d2 <= s3 + tol:
            return "fair-2"
        if d1 >= b1 * s3 - tol and d2 >= b2 * s3 - tol:
            return "fair-3"
        return "fair-4"
    if kind is ModelKind.PRIORITY_INVARIANT:
        a1, a2 = model.alpha
        if d1 + d2 < s3 - tol:
            return "priority-1"
        if d1 >= a1 * s3 - tol and d2 >= a2 * s3 - tol:
            return "priority-2"
        return "priority-3"
    # constant and constant-invariant share the same region decomposition
    a1, a2 = model.alpha
    name = "constant" if kind is ModelKind.CONSTANT else "constant_invariant"
    if d1 + d2 < s3 - tol and d1 <= a1 * c3 + tol and d2 <= a2 * c3 + tol:
        return f"{name}-1"
    if d1 > a1 * c3 + tol and d2 < s3 - a1 * c3 - tol:
        return f"{name}-2(i=1)"
    if d2 > a2 * c3 + tol and d1 < s3 - a2 * c3 - tol:
        return f"{name}-2(i=2)"
    if d1 >= a1 * s3 - tol and d2 >= a2 * s3 - tol:
        return f"{name}-4"
    return f"{name}-3"


def solve(problem: RiemannProblem) -> RiemannSolution:
    model = problem.model
    if not model.has_global_flux:
        raise UnsupportedModelError(
            "the scaled fair model has no closed-form Riemann solution"
        )
    c1, c2, c3 = problem.capacities
    d1, d2 = problem.u1.demand, problem.u2.demand
    s3 = problem.u3.supply
    tol = REL_TOL * max(c1, c2, c3)

    fluxes = model.global_flux(d1, d2, s3, c1, c2, c3)
    q1, q2, q3 = fluxes.q1, fluxes.q2, fluxes.q3
    region = _region_label(model, d1, d2, s3, c1, c2, c3, tol)

    stat1 = stationary_from_flux(q1, d1, problem.u1.supply, c1, Side.UPSTREAM)
    stat2 = stationary_from_flux(q2, d2, problem.u2.supply, c2, Side.UPSTREAM)
    stat3 = stationary_from_flux(q3, problem.u3.demand, s3, c3, Side.DOWNSTREAM)

    int1, uniq1 = _upstream_interior(model, q1, d1, q2, d2, s3, c1, c2, q3, tol, up_index=1)
    int2, uniq2 = _upstream_interior(model, q2, d2, q1, d1, s3, c2, c1, q3, tol, up_index=2)
    int3, uniq3 = _downstream_interior(model, fluxes, d1, d2, s3, c3, stat3, tol)

    wave1 = _link_wave(problem.fd1, problem.u1, stat1, Side.UPSTREAM)
    wave2 = _link_wave(problem.fd2, problem.u2, stat2, Side.UPSTREAM)
    wave3 = _link_wave(problem.fd3, problem.u3, stat3, Side.DOWNSTREAM)

    return RiemannSolution(
        fluxes=fluxes,
        region=region,
        link1=LinkSolution(stat1, int1, uniq1, wave1),
        link2=LinkSolution(stat2, int2, uniq2, wave2),
        link3=LinkSolution(stat3, int3, uniq3, wave3),
    )


def _upstream_interior(
    model: MergeModel,
    q_i: float,
    d_i: float,
    q_j: float,
    d_j: float,
    s3: float,
    c_i: float,
    c_j: float,
    q3: float,
    tol: float,
    up_index: int,
) -> tuple[SDState, bool]:
    """Interior state on an upstream link.

    Over-critical stationary states force the interior to coincide with them.
    Under-critical ones leave the interior demand free; only the fair scheme
    inflates it (when the partner link queues and the downstream supply binds)
    so that the local apportioning reproduces q_i = D_i.
    """
    if q_i < d_i - tol:
        return SDState(c_i, q_i), True  # SOC: interior pinned to stationary
    stationary = SDState(d_i, c_i)
    if model.kind is ModelKind.FAIR and q_j < d_j - tol and q3 >= s3 - tol:
        inflated = d_i * c_j / (s3 - d_i)
        return SDState(min(inflated, c_i), c_i), True
    return stationary, True


def _downstream_interior(
    model: MergeModel,
    fluxes: FluxTriple,
    d1: float,
    d2: float,
    s3: float,
    c3: float,
    stat3: SDState,
    tol: float,
) -> tuple[SDState, bool]:
    q3 = fluxes.q3
    if q3 < s3 - tol:
        return stat3, True  # SUC: interior pinned to stationary
    # q3 = S3: stationary is (C3, S3); the canonical interior coincides with it
    if model.kind is ModelKind.FAIR:
        # one-parameter family exists exactly when D1 + D2 = S3 < C3
        non_unique = abs(d1 + d2 - s3) <= tol and s3 < c3 - tol
        return SDState(c3, s3), not non_unique
    if model.kind is ModelKind.CONSTANT:
        # one upstream link kept under-critical: the local rule needs an
        # inflated downstream supply to release the full demand of that link
        a1, a2 = model.alpha
        if fluxes.q1 >= d1 - tol and fluxes.q2 < d2 - tol and a2 > 0.0:
            return SDState(c3, min(fluxes.q2 / a2, c3)), True
        if fluxes.q2 >= d2 - tol and fluxes.q1 < d1 - tol and a1 > 0.0:
            return SDState(c3, min(fluxes.q1 / a1, c3)), True
    return SDState(c3, s3), True


def _link_wave(
    fd: FundamentalDiagram, u_init: SDState, u_stat: SDState, side: Side
) -> WaveFan:
    rho_init = u_init.density(fd)
    rho_stat = u_stat.density(fd)
    if side is Side.UPSTREAM:
        return classify_wave(fd, rho_init, rho_stat)
    return classify_wave(fd, rho_stat, rho_init)


# ---------------------------------------------------------------------------
# Independent fixed-point oracle
# ---------------------------------------------------------------------------

_BISECT_ITERS = 48


def _plain_local(model: MergeModel, c3: float):
    """Local flux as a plain-float function (d1, d2, s3) -> (q1, q2).

    Avoids dataclass construction inside the oracle's bisection loops.
    """
    a1, a2 = model.alpha
    kind = model.kind
    if kind in (ModelKind.FAIR, ModelKind.SCALED_FAIR):
        gamma = 1.0 if kind is ModelKind.FAIR else model.gamma

        def fair(d1, d2, s3):
            total = d1 + d2
            factor = 1.0 if total <= 0.0 else min(1.0, gamma * s3 / total)
            return factor * d1, factor * d2

        return fair
    if kind is ModelKind.CONSTANT:
        return lambda d1, d2, s3: (min(d1, a1 * s3), min(d2, a2 * s3))
    if kind is ModelKind.PRIORITY_INVARIANT:
        return lambda d1, d2, s3: (
            min(d1, max(s3 - d2, a1 * s3)),
            min(d2, max(s3 - d1, a2 * s3)),
        )
    if kind is ModelKind.CONSTANT_INVARIANT:
        return lambda d1, d2, s3: (
            min(d1, a1 * c3, max(s3 - d2, a1 * s3)),
            min(d2, a2 * c3, max(s3 - d1, a2 * s3)),
        )
    raise UnsupportedModelError(f"no local flux for {kind}")


def fixed_point_oracle(
    model: MergeModel, problem: RiemannProblem, grid: int = 2000
) -> FluxTriple:
    """Brute-force junction fluxes, independent of the closed forms.

    Enumerates the regime combinations (each upstream link ends
    under-critical or queued; the downstream link ends below or at its
    supply), pins the interior variables the regimes fix, and searches the
    remaining ones by monotone bisection on [0, C] flow intervals until the
    local apportioning rule, conservation, and the admissibility bounds are
    simultaneously satisfied. All consistent combinations must agree on the
    fluxes within grid resolution.
    """
    c1, c2, c3 = problem.capacities
    d1_0, d2_0 = problem.u1.demand, problem.u2.demand
    s3_0 = problem.u3.supply
    res = max(c1, c2, c3) / grid
    f = _plain_local(model, c3)

    def inner_d(j: int, d_other: float, s3: float, target: float) -> float | None:
        """Smallest interior demand on UC link j with F_j = target (monotone)."""
        if j == 1:
            fj = lambda dj: f(dj, d_other, s3)[0]
            cap = c1
        else:
            fj = lambda dj: f(d_other, dj, s3)[1]
            cap = c2
        if fj(cap) < target - res:
            return None
        lo, hi = 0.0, cap
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            if fj(mid) < target:
                lo = mid
            else:
                hi = mid
        return hi if abs(fj(hi) - target) <= res else None

    candidates: list[tuple[float, float]] = []

    def accept(q1: float, q2: float) -> None:
        if q1 < -res or q2 < -res:
            return
        if q1 > d1_0 + res or q2 > d2_0 + res or q1 + q2 > s3_0 + res:
            return
        candidates.append((q1, q2))

    # --- downstream below supply: interior supply pinned at C3 -------------
    # both upstream queued
    q1, q2 = f(c1, c2, c3)
    if q1 < d1_0 - res and q2 < d2_0 - res and q1 + q2 < s3_0 - res:
        accept(q1, q2)
    # link 1 queued, link 2 under-critical
    d2i = inner_d(2, c1, c3, d2_0)
    if d2i is not None:
        q1 = f(c1, d2i, c3)[0]
        if q1 < d1_0 - res and q1 + d2_0 < s3_0 - res:
            accept(q1, d2_0)
    # link 2 queued, link 1 under-critical
    d1i = inner_d(1, c2, c3, d1_0)
    if d1i is not None:
        q2 = f(d1i, c2, c3)[1]
        if q2 < d2_0 - res and d1_0 + q2 < s3_0 - res:
            accept(d1_0, q2)
    # both under-critical: initial demands themselves must be consistent
    # (every local rule satisfies F_i <= d_i, so checking the most generous
    # interior supply s3 = C3 decides existence)
    q1, q2 = f(d1_0, d2_0, c3)
    if abs(q1 - d1_0) <= res and abs(q2 - d2_0) <= res and d1_0 + d2_0 < s3_0 - res:
        accept(d1_0, d2_0)

    # --- downstream at supply: q3 = S3, interior supply s3 free ------------
    if d1_0 + d2_0 >= s3_0 - res:
        # both under-critical (only on the boundary D1 + D2 = S3)
        if abs(d1_0 + d2_0 - s3_0) <= res:
            q1, q2 = f(d1_0, d2_0, c3)
            if abs(q1 - d1_0) <= res and abs(q2 - d2_0) <= res:
                accept(d1_0, d2_0)
        # link i queued, link j under-critical: conservation fixes q_i
        for i in (1, 2):
            d_i0, d_j0 = (d1_0, d2_0) if i == 1 else (d2_0, d1_0)
            q_i = s3_0 - d_j0
            if not (-res <= q_i < d_i0 - res):
                continue
            c_i = c1 if i == 1 else c2
            j = 2 if i == 1 else 1
            pick_i = 0 if i == 1 else 1

            def gap(s3: float) -> float | None:
                dj = inner_d(j, c_i, s3, d_j0)
                if dj is None:
                    return None
                pair = f(c_i, dj, s3) if i == 1 else f(dj, c_i, s3)
                return pair[pick_i] - q_i

            # gap is monotone nondecreasing in s3 on its feasible range;
            # the root frequently sits at s3 = S3 itself, so try that first
            g = gap(s3_0)
            if g is not None and abs(g) <= res:
                pass
            else:
                g_hi = gap(c3)
                if g_hi is None or g_hi < -res:
                    continue
                lo, hi = 0.0, c3
                for _ in range(_BISECT_ITERS):
                    mid = 0.5 * (lo + hi)
                    gm = gap(mid)
                    if gm is None or gm < 0.0:
                        lo = mid
                    else:
                        hi = mid
                g = gap(hi)
                if g is None or abs(g) > res:
                    continue
            if i == 1:
                accept(q_i, d_j0)
            else:
                accept(d_j0, q_i)
        # both queued: total local flux must meet S3 for some interior supply
        q1, q2 = f(c1, c2, s3_0)
        if abs(q1 + q2 - s3_0) > res:
            if f(c1, c2, c3)[0] + f(c1, c2, c3)[1] >= s3_0 - res:
                lo, hi = 0.0, c3
                for _ in range(_BISECT_ITERS):
                    mid = 0.5 * (lo + hi)
                    qm1, qm2 = f(c1, c2, mid)
                    if qm1 + qm2 < s3_0:
                        lo = mid
                    else:
                        hi = mid
                q1, q2 = f(c1, c2, hi)
        if abs(q1 + q2 - s3_0) <= res and q1 < d1_0 + res and q2 < d2_0 + res:
            accept(q1, q2)

    if not candidates:
        raise OracleFailureError(
            f"no consistent junction configuration for D=({d1_0}, {d2_0}), S3={s3_0}"
        )
    q1s = [q for q, _ in candidates]
    q2s = [q for _, q in candidates]
    agree_tol = 4.0 * res
    if max(q1s) - min(q1s) > agree_tol or max(q2s) - min(q2s) > agree_tol:
        raise OracleFailureError(
            f"ambiguous junction configurations {candidates} for "
            f"D=({d1_0}, {d2_0}), S3={s3_0}"
        )
    return FluxTriple(q1s[0], q2s[0])
